#include "neurodecode/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "neurodecode/io_util.hpp"

namespace neurodecode::dataset {

namespace {

using nlohmann::json;

const char* kManifestKeys[] = {"rate_hz",     "epoch_samples", "channel_names",
                               "class_names", "trials",        "preprocessed"};

void reject_unknown_keys(const json& j) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : kManifestKeys)
      if (item.key() == k) known = true;
    if (!known)
      throw std::invalid_argument("manifest: unknown key '" + item.key() + "'");
  }
}

Matrix read_trial_csv(const std::filesystem::path& path, std::size_t channels,
                      std::size_t epoch_samples) {
  const std::string text = io::read_file(path);
  Matrix m(channels, epoch_samples);
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (eol > pos) {  // skip blank trailing line
      if (row >= channels)
        throw std::invalid_argument(path.string() + ": more rows than declared channels");
      std::size_t col = 0;
      std::size_t p = pos;
      while (p < eol) {
        std::size_t comma = text.find(',', p);
        if (comma == std::string::npos || comma > eol) comma = eol;
        if (col >= epoch_samples)
          throw std::invalid_argument(path.string() + ": more columns than epoch_samples");
        double v = 0.0;
        const char* first = text.data() + p;
        const char* last = text.data() + comma;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last)
          throw std::invalid_argument(path.string() + ": bad numeric field '" +
                                      std::string(first, last) + "'");
        m(row, col++) = v;
        p = comma + 1;
      }
      if (col != epoch_samples)
        throw std::invalid_argument(path.string() + ": row " + std::to_string(row) +
                                    " has " + std::to_string(col) + " columns, expected " +
                                    std::to_string(epoch_samples));
      ++row;
    }
    pos = eol + 1;
  }
  if (row != channels)
    throw std::invalid_argument(path.string() + ": has " + std::to_string(row) +
                                " rows, expected " + std::to_string(channels) +
                                " channels");
  return m;
}

std::string trial_csv_text(const Matrix& m) {
  std::string out;
  out.reserve(m.rows() * m.cols() * 20);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      out += io::format_double(m(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace

TrialSet load_manifest(const std::filesystem::path& manifest_path) {
  json j;
  try {
    j = json::parse(io::read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("manifest parse error: " + std::string(e.what()));
  }
  if (!j.is_object()) throw std::invalid_argument("manifest: not a JSON object");
  reject_unknown_keys(j);
  for (const char* k : {"rate_hz", "epoch_samples", "channel_names", "class_names", "trials"})
    if (!j.contains(k))
      throw std::invalid_argument(std::string("manifest: missing key '") + k + "'");

  TrialSet set;
  set.rate_hz = j.at("rate_hz").get<double>();
  set.epoch_samples = j.at("epoch_samples").get<std::size_t>();
  set.channel_names = j.at("channel_names").get<std::vector<std::string>>();
  const json& cls = j.at("class_names");
  for (const auto& item : cls.items()) {
    if (item.key() != "0" && item.key() != "1")
      throw std::invalid_argument("manifest: class_names keys must be \"0\" and \"1\"");
    set.class_names[item.key() == "0" ? 0 : 1] = item.value().get<std::string>();
  }

  const std::filesystem::path dir = manifest_path.parent_path();
  for (const json& tj : j.at("trials")) {
    Trial t;
    t.trial_id = tj.at("id").get<std::int64_t>();
    t.label = tj.at("label").get<int>();
    const auto file = tj.at("file").get<std::string>();
    t.epoch.rate_hz = set.rate_hz;
    t.epoch.channel_names = set.channel_names;
    t.epoch.samples = read_trial_csv(dir / file, set.channel_names.size(), set.epoch_samples);
    set.trials.push_back(std::move(t));
  }
  set.validate();
  return set;
}

void save_manifest(const TrialSet& set, const std::filesystem::path& manifest_path,
                   const std::string* preprocessed_json) {
  set.validate();
  const std::filesystem::path dir = manifest_path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);

  json j;
  j["rate_hz"] = set.rate_hz;
  j["epoch_samples"] = set.epoch_samples;
  j["channel_names"] = set.channel_names;
  j["class_names"] = json::object();
  for (const auto& [label, name] : set.class_names)
    j["class_names"][std::to_string(label)] = name;
  if (preprocessed_json) j["preprocessed"] = json::parse(*preprocessed_json);

  j["trials"] = json::array();
  for (const Trial& t : set.trials) {
    char name[40];
    std::snprintf(name, sizeof(name), "trial_%06lld.csv",
                  static_cast<long long>(t.trial_id));
    io::write_file_atomic(dir / name, trial_csv_text(t.epoch.samples));
    j["trials"].push_back({{"id", t.trial_id}, {"label", t.label}, {"file", name}});
  }
  io::write_file_atomic(manifest_path, j.dump(2) + "\n");
}

}  // namespace neurodecode::dataset
