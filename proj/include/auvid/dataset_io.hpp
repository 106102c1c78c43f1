#pragma once

#include <filesystem>
#include <string>

#include "auvid/excitation.hpp"
#include "auvid/kvconfig.hpp"

namespace auvid::io {

inline constexpr const char* kOutputNames[kOutputDim] = {"theta", "psi", "u",   "q",
                                                         "r",     "duc", "dqc", "drc"};

/// CSV with header `t,du,dq,dr,theta,psi,u,q,r,duc,dqc,drc` and, when
/// `with_truth`, the trailing columns `px,py,pz,w`. Time has 6 decimals;
/// values are written losslessly.
void write_trajectory_csv(const std::filesystem::path& file, const excitation::Trajectory& traj,
                          double delta, bool with_truth = true);

/// Reads a file written by write_trajectory_csv. Missing truth columns are zero.
excitation::Trajectory read_trajectory_csv(const std::filesystem::path& file);

void write_stats(kv::Document& doc, const std::string& section,
                 const excitation::NormalizationStats& stats);
excitation::NormalizationStats read_stats(const kv::SectionReader& reader);

/// Writes `dir/batch_<i>.csv` for every batch plus `dir/meta`.
void save_dataset(const excitation::Dataset& ds, const std::filesystem::path& dir);
excitation::Dataset load_dataset(const std::filesystem::path& dir);

/// Normalization statistics straight from `dir/meta` without reading batches.
excitation::NormalizationStats load_dataset_stats(const std::filesystem::path& dir);

/// Fingerprint of every file in a directory (names and contents, sorted).
std::string directory_hash(const std::filesystem::path& dir);

/// Writes to a temporary sibling and renames over the target.
void atomic_write(const std::filesystem::path& file, const std::string& content);

}  // namespace auvid::io
