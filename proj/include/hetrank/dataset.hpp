#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetrank/errors.hpp"

namespace hetrank {

using ItemId = std::uint32_t;
using UserId = std::uint32_t;

using ScoreVector = std::vector<double>;
using AccuracyVector = std::vector<double>;
using Ranking = std::vector<ItemId>;

/// One observed comparison: `user` preferred `winner` over `loser` (Y = 1 with
/// i = winner, j = loser). Virtual records come from the regularizing virtual
/// node and are weighted separately by the loss.
struct Comparison {
  UserId user = 0;
  ItemId winner = 0;
  ItemId loser = 0;
  bool is_virtual = false;

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

inline const std::string kVirtualLabel = "__virtual__";

/// Immutable comparison dataset with a per-user index.
class ComparisonDataset {
 public:
  ComparisonDataset() = default;

  ComparisonDataset(std::size_t n_items, std::size_t n_users, std::vector<Comparison> records,
                    std::vector<std::string> item_labels = {},
                    std::vector<std::string> user_labels = {},
                    std::optional<ItemId> virtual_item = std::nullopt,
                    std::optional<UserId> virtual_user = std::nullopt)
      : n_items_(n_items),
        n_users_(n_users),
        records_(std::move(records)),
        item_labels_(std::move(item_labels)),
        user_labels_(std::move(user_labels)),
        virtual_item_(virtual_item),
        virtual_user_(virtual_user) {
    if (!item_labels_.empty() && item_labels_.size() != n_items_) {
      throw InvalidArgument("item label count does not match item count");
    }
    if (!user_labels_.empty() && user_labels_.size() != n_users_) {
      throw InvalidArgument("user label count does not match user count");
    }
    // The virtual item and user, when present, always take the last ids so that
    // real items form the prefix [0, n_real_items()).
    if (virtual_item_.has_value() != virtual_user_.has_value()) {
      throw InvalidArgument("virtual item and virtual user must be given together");
    }
    if (virtual_item_ && (n_items_ == 0 || *virtual_item_ != n_items_ - 1)) {
      throw InvalidArgument("virtual item must be the last item id");
    }
    if (virtual_user_ && (n_users_ == 0 || *virtual_user_ != n_users_ - 1)) {
      throw InvalidArgument("virtual user must be the last user id");
    }
    by_user_.assign(n_users_, {});
    for (std::size_t r = 0; r < records_.size(); ++r) {
      const Comparison& c = records_[r];
      if (c.user >= n_users_) throw InvalidArgument("record user id out of range");
      if (c.winner >= n_items_ || c.loser >= n_items_) throw InvalidArgument("record item id out of range");
      if (c.winner == c.loser) throw InvalidArgument("record compares an item with itself");
      by_user_[c.user].push_back(r);
    }
  }

  std::size_t n_items() const noexcept { return n_items_; }
  std::size_t n_users() const noexcept { return n_users_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::span<const Comparison> records() const noexcept { return records_; }
  std::span<const std::size_t> user_records(UserId u) const { return by_user_.at(u); }
  std::size_t user_count(UserId u) const { return by_user_.at(u).size(); }

  const std::vector<std::string>& item_labels() const noexcept { return item_labels_; }
  const std::vector<std::string>& user_labels() const noexcept { return user_labels_; }
  std::string item_label(ItemId i) const {
    return item_labels_.empty() ? std::to_string(i) : item_labels_.at(i);
  }
  std::string user_label(UserId u) const {
    return user_labels_.empty() ? std::to_string(u) : user_labels_.at(u);
  }

  std::optional<ItemId> virtual_item() const noexcept { return virtual_item_; }
  std::optional<UserId> virtual_user() const noexcept { return virtual_user_; }
  bool has_virtual_node() const noexcept { return virtual_item_.has_value(); }
  bool is_real_item(ItemId i) const noexcept { return !virtual_item_ || *virtual_item_ != i; }
  bool is_real_user(UserId u) const noexcept { return !virtual_user_ || *virtual_user_ != u; }

  std::size_t n_real_items() const noexcept { return n_items_ - (virtual_item_ ? 1 : 0); }
  std::size_t n_real_users() const noexcept { return n_users_ - (virtual_user_ ? 1 : 0); }

  /// Real users with no comparisons; they are left out of the loss average.
  std::vector<UserId> empty_users() const {
    std::vector<UserId> out;
    for (UserId u = 0; u < n_users_; ++u) {
      if (is_real_user(u) && by_user_[u].empty()) out.push_back(u);
    }
    return out;
  }

  /// Real users that contribute to the loss (k_u >= 1).
  std::size_t n_active_users() const noexcept {
    std::size_t count = 0;
    for (UserId u = 0; u < n_users_; ++u) {
      if (is_real_user(u) && !by_user_[u].empty()) ++count;
    }
    return count;
  }

  /// Per-item number of comparisons the item takes part in (real records only).
  std::vector<std::size_t> item_degrees() const {
    std::vector<std::size_t> deg(n_items_, 0);
    for (const Comparison& c : records_) {
      if (c.is_virtual) continue;
      ++deg[c.winner];
      ++deg[c.loser];
    }
    return deg;
  }

  /// True when every item is reachable from every other through comparisons.
  bool is_connected() const {
    if (n_items_ <= 1) return true;
    std::vector<ItemId> parent(n_items_);
    std::iota(parent.begin(), parent.end(), ItemId{0});
    auto find = [&](ItemId x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const Comparison& c : records_) parent[find(c.winner)] = find(c.loser);
    const ItemId root = find(0);
    for (ItemId i = 1; i < n_items_; ++i) {
      if (find(i) != root) return false;
    }
    return true;
  }

 private:
  std::size_t n_items_ = 0;
  std::size_t n_users_ = 0;
  std::vector<Comparison> records_;
  std::vector<std::vector<std::size_t>> by_user_;
  std::vector<std::string> item_labels_;
  std::vector<std::string> user_labels_;
  std::optional<ItemId> virtual_item_;
  std::optional<UserId> virtual_user_;
};

/// Appends a virtual item and a virtual user. The virtual user compares the
/// virtual item against every real item twice (one win, one loss); those 2n
/// records carry the is_virtual flag.
inline ComparisonDataset add_virtual_node(const ComparisonDataset& data) {
  if (data.has_virtual_node()) throw InvalidArgument("dataset already has a virtual node");
  const auto v_item = static_cast<ItemId>(data.n_items());
  const auto v_user = static_cast<UserId>(data.n_users());
  std::vector<Comparison> records(data.records().begin(), data.records().end());
  records.reserve(records.size() + 2 * data.n_items());
  for (ItemId i = 0; i < v_item; ++i) {
    records.push_back({v_user, v_item, i, true});
    records.push_back({v_user, i, v_item, true});
  }
  auto item_labels = data.item_labels();
  auto user_labels = data.user_labels();
  if (!item_labels.empty()) item_labels.push_back(kVirtualLabel);
  if (!user_labels.empty()) user_labels.push_back(kVirtualLabel);
  return ComparisonDataset(data.n_items() + 1, data.n_users() + 1, std::move(records),
                           std::move(item_labels), std::move(user_labels), v_item, v_user);
}

/// Items sorted by descending score; ties keep ascending item id.
inline Ranking ground_truth_ranking(std::span<const double> scores) {
  for (double s : scores) {
    if (std::isnan(s)) throw InvalidArgument("score vector contains NaN");
  }
  Ranking order(scores.size());
  std::iota(order.begin(), order.end(), ItemId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ItemId a, ItemId b) { return scores[a] > scores[b]; });
  return order;
}

/// Known answer for a dataset. `scores` may be absent when only an order is
/// known; `accuracies` is filled for synthetic data.
struct GroundTruth {
  std::optional<ScoreVector> scores;
  Ranking ranking;
  std::optional<AccuracyVector> accuracies;

  static GroundTruth from_scores(ScoreVector s, std::optional<AccuracyVector> gamma = std::nullopt) {
    GroundTruth t;
    t.ranking = ground_truth_ranking(s);
    t.scores = std::move(s);
    t.accuracies = std::move(gamma);
    return t;
  }
};

}  // namespace hetrank
