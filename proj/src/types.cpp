#include "neurodecode/types.hpp"

#include <stdexcept>
#include <unordered_set>

namespace neurodecode {

void Recording::validate() const {
  if (samples.rows() < 2)
    throw std::invalid_argument("recording needs at least 2 channels");
  if (samples.cols() < 1)
    throw std::invalid_argument("recording needs at least 1 sample");
  if (!(rate_hz > 0.0))
    throw std::invalid_argument("recording rate must be positive");
  if (channel_names.size() != samples.rows())
    throw std::invalid_argument("channel name count does not match channel count");
  if (!samples.all_finite())
    throw std::invalid_argument("recording contains a non-finite sample");
}

std::size_t TrialSet::count_label(int label) const {
  std::size_t n = 0;
  for (const Trial& t : trials)
    if (t.label == label) ++n;
  return n;
}

void TrialSet::validate() const {
  if (!(rate_hz > 0.0)) throw std::invalid_argument("trial set rate must be positive");
  if (channel_names.size() < 2)
    throw std::invalid_argument("trial set needs at least 2 channels");
  std::unordered_set<std::int64_t> ids;
  for (const Trial& t : trials) {
    if (t.label != 0 && t.label != 1)
      throw std::invalid_argument("unknown label value for trial " +
                                  std::to_string(t.trial_id));
    if (!ids.insert(t.trial_id).second)
      throw std::invalid_argument("duplicate trial id " + std::to_string(t.trial_id));
    if (t.epoch.channels() != channel_names.size())
      throw std::invalid_argument("trial " + std::to_string(t.trial_id) +
                                  ": channel count mismatch");
    if (t.epoch.length() != epoch_samples)
      throw std::invalid_argument("trial " + std::to_string(t.trial_id) +
                                  ": epoch length mismatch");
    if (t.epoch.rate_hz != rate_hz)
      throw std::invalid_argument("trial " + std::to_string(t.trial_id) +
                                  ": rate mismatch");
    if (!t.epoch.samples.all_finite())
      throw std::invalid_argument("trial " + std::to_string(t.trial_id) +
                                  ": non-finite sample");
  }
}

}  // namespace neurodecode
