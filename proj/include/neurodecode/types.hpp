#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "neurodecode/matrix.hpp"

namespace neurodecode {

/// A multichannel signal segment: samples[channel][time] in microvolts.
struct Recording {
  Matrix samples;  // [channels x time]
  double rate_hz = 0.0;
  std::vector<std::string> channel_names;

  std::size_t channels() const { return samples.rows(); }
  std::size_t length() const { return samples.cols(); }

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

/// One labeled epoch. Labels are binary: 0/1, names carried by the TrialSet.
struct Trial {
  std::int64_t trial_id = 0;
  int label = 0;
  Recording epoch;
};

struct TrialSet {
  std::vector<Trial> trials;
  std::map<int, std::string> class_names;  // {0: name, 1: name}
  double rate_hz = 0.0;
  std::size_t epoch_samples = 0;
  std::vector<std::string> channel_names;

  std::size_t channels() const { return channel_names.size(); }
  std::size_t count_label(int label) const;

  /// Checks shape consistency, id uniqueness, label values and finiteness.
  void validate() const;
};

}  // namespace neurodecode
