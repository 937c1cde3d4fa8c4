#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stconv::eval {

struct Fold {
  std::vector<std::size_t> train;  // ascending indices
  std::vector<std::size_t> test;
};

/// Stratified k-fold: each class is shuffled with the seed and dealt round
/// robin over the folds, continuing the rotation from one class to the next.
/// Stratification error when a class has fewer than k members.
std::vector<Fold> kfold_split(std::span<const int> labels, std::size_t k, std::uint64_t seed);

/// Fixed assignment from a CSV `video_id,fold` (folds numbered from 0).
std::vector<Fold> read_fold_file(const std::filesystem::path& path,
                                 std::span<const std::string> video_ids);
void write_fold_file(const std::filesystem::path& path, std::span<const std::string> video_ids,
                     const std::vector<Fold>& folds);

}  // namespace stconv::eval
