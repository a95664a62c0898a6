// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "netmirror/account_id.hpp"
#include "netmirror/graph.hpp"

namespace netmirror {

enum class IdeologyLabel { Left, Right, Unsure };

std::string_view to_string(IdeologyLabel label);

struct IdeologyScore {
  AccountId account;
  double p_left = 0.5;
};

using LabelMap = std::unordered_map<AccountId, IdeologyLabel>;

// Left when p_left >= threshold, Right when 1 - p_left >= threshold.
// Requires 0.5 < threshold <= 1.
IdeologyLabel label_ideology(const IdeologyScore& s, double threshold = 0.6);

// "id,p_left" (optional header). Throws InputError on bad rows or p outside [0,1].
std::vector<IdeologyScore> read_ideology_scores(std::istream& in,
                                                const std::string& source);
LabelMap label_all(std::span<const IdeologyScore> scores, double threshold = 0.6);

// Left/Right composition and its base-2 entropy.
struct DiversityBreakdown {
  double p_left = 0.0;
  double p_right = 0.0;
  double score = 0.0;
  std::size_t counted = 0;
  std::size_t excluded = 0;
  bool degenerate = true;  // no Left/Right mass at all
};

// Accumulates (possibly weighted) Left/Right mass. Unsure and unknown
// accounts only bump the excluded count.
struct LabelMass {
  double left = 0.0;
  double right = 0.0;
  std::size_t counted = 0;
  std::size_t excluded = 0;

  void add(std::optional<IdeologyLabel> label, double weight = 1.0);
  DiversityBreakdown breakdown() const;
};

// Binary entropy in bits of (left, right) masses; 1 exactly iff equal and
// non-zero, 0 when either side is empty.
double balance_entropy(double left, double right);

// Unweighted diversity of a followee set; duplicates count once.
DiversityBreakdown connection_diversity(std::span<const AccountId> followees,
                                        const LabelMap& labels);

// PageRank-weighted diversity of the user's neighbourhood in the sample graph.
// Throws NotFoundError when the user is absent.
DiversityBreakdown displayed_diversity(const AccountId& user,
                                       const MutualGraph& sample,
                                       const PageRankVector& pr,
                                       const LabelMap& labels);

std::optional<IdeologyLabel> lookup_label(const LabelMap& labels, const AccountId& id);

// ---- URL alignment ----

// Lowercased host without a leading "www."; nullopt when the URL has no
// scheme://host shape.
std::optional<std::string> extract_domain(std::string_view url);

class AlignmentTable {
 public:
  AlignmentTable() = default;
  // Keys are stored lowercased without a leading "www.". Throws
  // ValidationError for values outside [-1, 1] or an empty domain.
  void set(std::string domain, double alignment);
  std::optional<double> find(std::string_view domain) const;
  std::size_t size() const { return scores_.size(); }

 private:
  std::unordered_map<std::string, double> scores_;
};

// "domain,alignment" (optional header).
AlignmentTable read_alignment_table(std::istream& in, const std::string& source);

enum class SharePhase { Before, After };

std::string_view to_string(SharePhase phase);

struct AlignmentSummary {
  AccountId user;
  SharePhase phase = SharePhase::Before;
  std::optional<double> mean;  // defined iff urls_counted > 0
  std::size_t urls_counted = 0;
  std::size_t urls_skipped = 0;
};

AlignmentSummary url_alignment_avg(std::span<const std::string> urls,
                                   const AlignmentTable& table);

// |after| - |before|; nullopt when either side is undefined.
std::optional<double> alignment_delta(const AlignmentSummary& before,
                                      const AlignmentSummary& after);

struct ShareRecord {
  AccountId user;
  std::string timestamp;
  std::string url;
  SharePhase phase = SharePhase::Before;
};

// "user_id,timestamp_iso8601,url,phase" with phase in {before, after}.
std::vector<ShareRecord> read_share_log(std::istream& in, const std::string& source);

}  // namespace netmirror
