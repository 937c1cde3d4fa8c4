#include "stconv/eval/kfold.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "stconv/error.hpp"
#include "stconv/io.hpp"
#include "stconv/rng.hpp"

namespace stconv::eval {

namespace {

std::vector<Fold> folds_from_assignment(const std::vector<std::size_t>& fold_of, std::size_t k) {
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
    }
  }
  return folds;
}

}  // namespace

std::vector<Fold> kfold_split(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  require(k >= 2, ErrorCode::invalid_config, "k must be >= 2");
  require(k <= labels.size(), ErrorCode::invalid_config,
          "k = " + std::to_string(k) + " exceeds the number of videos");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> fold_of(labels.size());
  std::size_t dealt = 0;
  for (auto& [label, members] : by_class) {
    require(members.size() >= k, ErrorCode::stratification,
            "class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                " members, fewer than k = " + std::to_string(k));
    shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) fold_of[i] = dealt++ % k;
  }
  return folds_from_assignment(fold_of, k);
}

std::vector<Fold> read_fold_file(const std::filesystem::path& path,
                                 std::span<const std::string> video_ids) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open fold file " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "video_id,fold", ErrorCode::format, "fold file header must be 'video_id,fold'");
  std::map<std::string, std::size_t> fold_by_id;
  std::size_t k = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    std::size_t fold = 0;
    const auto r = comma == std::string::npos
                       ? std::from_chars_result{nullptr, std::errc::invalid_argument}
                       : std::from_chars(line.data() + comma + 1, line.data() + line.size(), fold);
    require(r.ec == std::errc() && r.ptr == line.data() + line.size(), ErrorCode::format,
            "bad fold row '" + line + "'");
    require(fold_by_id.emplace(line.substr(0, comma), fold).second, ErrorCode::format,
            "video listed twice in fold file: " + line.substr(0, comma));
    k = std::max(k, fold + 1);
  }
  std::vector<std::size_t> fold_of(video_ids.size());
  for (std::size_t i = 0; i < video_ids.size(); ++i) {
    const auto it = fold_by_id.find(video_ids[i]);
    require(it != fold_by_id.end(), ErrorCode::format,
            "fold file does not assign " + video_ids[i]);
    fold_of[i] = it->second;
  }
  require(k >= 2, ErrorCode::invalid_config, "fold file defines fewer than 2 folds");
  auto folds = folds_from_assignment(fold_of, k);
  for (std::size_t f = 0; f < k; ++f) {
    require(!folds[f].test.empty(), ErrorCode::invalid_config,
            "fold " + std::to_string(f) + " has no test videos");
  }
  return folds;
}

void write_fold_file(const std::filesystem::path& path, std::span<const std::string> video_ids,
                     const std::vector<Fold>& folds) {
  std::vector<std::size_t> fold_of(video_ids.size(), folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f)
    for (std::size_t i : folds[f].test) fold_of.at(i) = f;
  std::ostringstream out;
  out << "video_id,fold\n";
  for (std::size_t i = 0; i < video_ids.size(); ++i) {
    require(fold_of[i] < folds.size(), ErrorCode::invalid_config,
            video_ids[i] + " is in no test fold");
    out << video_ids[i] << ',' << fold_of[i] << '\n';
  }
  write_text_atomic(path, out.str());
}

}  // namespace stconv::eval
