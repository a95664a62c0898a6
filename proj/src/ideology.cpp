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
#include "netmirror/ideology.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "netmirror/csv.hpp"
#include "netmirror/errors.hpp"

namespace netmirror {

namespace {

std::optional<double> parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(IdeologyLabel label) {
  switch (label) {
    case IdeologyLabel::Left: return "left";
    case IdeologyLabel::Right: return "right";
    case IdeologyLabel::Unsure: return "unsure";
  }
  return "unsure";
}

std::string_view to_string(SharePhase phase) {
  return phase == SharePhase::Before ? "before" : "after";
}

IdeologyLabel label_ideology(const IdeologyScore& s, double threshold) {
  if (!(threshold > 0.5 && threshold <= 1.0)) {
    throw std::invalid_argument("ideology threshold must be in (0.5, 1]");
  }
  if (s.p_left >= threshold) return IdeologyLabel::Left;
  if (1.0 - s.p_left >= threshold) return IdeologyLabel::Right;
  return IdeologyLabel::Unsure;
}

std::vector<IdeologyScore> read_ideology_scores(std::istream& in,
                                                const std::string& source) {
  std::vector<IdeologyScore> out;
  for (auto& rec : csv::read_records(in, source, 2, {"id", "p_left"})) {
    if (rec.fields[0].empty()) throw InputError(source, rec.line, "empty account id");
    const auto p = parse_double(rec.fields[1]);
    if (!p || *p < 0.0 || *p > 1.0) {
      throw InputError(source, rec.line, "p_left must be a number in [0, 1]");
    }
    out.push_back({AccountId(rec.fields[0]), *p});
  }
  return out;
}

LabelMap label_all(std::span<const IdeologyScore> scores, double threshold) {
  LabelMap labels;
  labels.reserve(scores.size());
  for (const auto& s : scores) labels[s.account] = label_ideology(s, threshold);
  return labels;
}

std::optional<IdeologyLabel> lookup_label(const LabelMap& labels, const AccountId& id) {
  const auto it = labels.find(id);
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

void LabelMass::add(std::optional<IdeologyLabel> label, double weight) {
  if (label == IdeologyLabel::Left) {
    left += weight;
    ++counted;
  } else if (label == IdeologyLabel::Right) {
    right += weight;
    ++counted;
  } else {
    ++excluded;
  }
}

double balance_entropy(double left, double right) {
  if (!(left > 0.0) || !(right > 0.0)) return 0.0;
  if (left == right) return 1.0;
  const double total = left + right;
  const double p = left / total;
  const double q = right / total;
  const double h = -(p * std::log2(p) + q * std::log2(q));
  // Unequal masses must stay strictly below a perfect balance.
  return std::clamp(h, 0.0, std::nextafter(1.0, 0.0));
}

DiversityBreakdown LabelMass::breakdown() const {
  DiversityBreakdown b;
  b.counted = counted;
  b.excluded = excluded;
  const double total = left + right;
  if (counted == 0 || !(total > 0.0)) return b;
  b.degenerate = false;
  b.p_left = left / total;
  b.p_right = right / total;
  b.score = balance_entropy(left, right);
  return b;
}

DiversityBreakdown connection_diversity(std::span<const AccountId> followees,
                                        const LabelMap& labels) {
  std::unordered_set<AccountId> seen;
  seen.reserve(followees.size());
  LabelMass mass;
  for (const auto& f : followees) {
    if (!seen.insert(f).second) continue;
    mass.add(lookup_label(labels, f));
  }
  return mass.breakdown();
}

DiversityBreakdown displayed_diversity(const AccountId& user,
                                       const MutualGraph& sample,
                                       const PageRankVector& pr,
                                       const LabelMap& labels) {
  const NodeIndex u = sample.index_of(user);
  LabelMass mass;
  for (NodeIndex v : sample.neighbors(u)) {
    mass.add(lookup_label(labels, sample.id(v)), pr.scores[v]);
  }
  return mass.breakdown();
}

std::optional<std::string> extract_domain(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  for (std::size_t i = 0; i < sep; ++i) {
    const auto c = static_cast<unsigned char>(url[i]);
    const bool ok = std::isalpha(c) || (i > 0 && (std::isdigit(c) || c == '+' ||
                                                  c == '-' || c == '.'));
    if (!ok) return std::nullopt;
  }
  std::string_view rest = url.substr(sep + 3);
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (const auto at = rest.rfind('@'); at != std::string_view::npos) {
    rest = rest.substr(at + 1);
  }
  if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
    rest = rest.substr(0, colon);
  }
  std::string host;
  host.reserve(rest.size());
  for (char ch : rest) {
    const auto c = static_cast<unsigned char>(ch);
    if (!(std::isalnum(c) || c == '-' || c == '.')) return std::nullopt;
    host.push_back(static_cast<char>(std::tolower(c)));
  }
  if (host.rfind("www.", 0) == 0) host.erase(0, 4);
  if (host.empty() || host.front() == '.' || host.back() == '.' ||
      host.find('.') == std::string::npos) {
    return std::nullopt;
  }
  return host;
}

void AlignmentTable::set(std::string domain, double alignment) {
  if (!(alignment >= -1.0 && alignment <= 1.0)) {
    throw ValidationError("alignment for '" + domain + "' must be in [-1, 1]");
  }
  std::transform(domain.begin(), domain.end(), domain.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (domain.rfind("www.", 0) == 0) domain.erase(0, 4);
  if (domain.empty()) throw ValidationError("empty domain");
  scores_[std::move(domain)] = alignment;
}

std::optional<double> AlignmentTable::find(std::string_view domain) const {
  const auto it = scores_.find(std::string(domain));
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

AlignmentTable read_alignment_table(std::istream& in, const std::string& source) {
  AlignmentTable table;
  for (auto& rec : csv::read_records(in, source, 2, {"domain", "alignment"})) {
    const auto v = parse_double(rec.fields[1]);
    if (!v || *v < -1.0 || *v > 1.0) {
      throw InputError(source, rec.line, "alignment must be a number in [-1, 1]");
    }
    try {
      table.set(rec.fields[0], *v);
    } catch (const ValidationError& e) {
      throw InputError(source, rec.line, e.what());
    }
  }
  return table;
}

AlignmentSummary url_alignment_avg(std::span<const std::string> urls,
                                   const AlignmentTable& table) {
  AlignmentSummary s;
  double sum = 0.0;
  double lo = 1.0;
  double hi = -1.0;
  for (const auto& url : urls) {
    const auto domain = extract_domain(url);
    const auto score = domain ? table.find(*domain) : std::nullopt;
    if (!score) {
      ++s.urls_skipped;
      continue;
    }
    sum += *score;
    lo = std::min(lo, *score);
    hi = std::max(hi, *score);
    ++s.urls_counted;
  }
  if (s.urls_counted > 0) {
    // Rounding in the sum must not push the mean outside the observed range.
    s.mean = std::clamp(sum / static_cast<double>(s.urls_counted), lo, hi);
  }
  return s;
}

std::optional<double> alignment_delta(const AlignmentSummary& before,
                                      const AlignmentSummary& after) {
  if (!before.mean || !after.mean) return std::nullopt;
  return std::abs(*after.mean) - std::abs(*before.mean);
}

std::vector<ShareRecord> read_share_log(std::istream& in, const std::string& source) {
  std::vector<ShareRecord> out;
  for (auto& rec : csv::read_records(in, source, 4,
                                     {"user_id", "timestamp_iso8601", "url", "phase"})) {
    ShareRecord r;
    if (rec.fields[0].empty()) throw InputError(source, rec.line, "empty user id");
    r.user = AccountId(rec.fields[0]);
    r.timestamp = rec.fields[1];
    r.url = rec.fields[2];
    if (rec.fields[3] == "before") {
      r.phase = SharePhase::Before;
    } else if (rec.fields[3] == "after") {
      r.phase = SharePhase::After;
    } else {
      throw InputError(source, rec.line, "phase must be 'before' or 'after'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace netmirror
