#pragma once

#include <filesystem>

#include "neurodecode/types.hpp"

// On-disk data model: a JSON manifest next to one CSV file per trial.
//
// Manifest fields: rate_hz (number), epoch_samples (int), channel_names
// (array of strings), class_names ({"0": name, "1": name}), trials (array of
// {id, label, file}) where file is relative to the manifest directory.
// An optional "preprocessed" object records an applied conditioning chain.
//
// Trial CSV: one row per channel, epoch_samples columns, no header. Values
// are written with 17 significant digits so a save/load round trip is exact.

namespace neurodecode::dataset {

TrialSet load_manifest(const std::filesystem::path& manifest_path);

/// Writes manifest + trial CSVs into the manifest's directory, creating it if
/// needed. All files are written atomically (temp + rename). `preprocessed`,
/// when non-null, is stored verbatim in the manifest.
void save_manifest(const TrialSet& set, const std::filesystem::path& manifest_path,
                   const std::string* preprocessed_json = nullptr);

}  // namespace neurodecode::dataset
