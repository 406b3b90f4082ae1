#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairhil/binning.hpp"
#include "fairhil/data_table.hpp"

namespace fairhil {

inline constexpr std::size_t kDefaultMaxConstraints = 3;

// Conjunction of (feature, value-or-bin) pairs. Constraints are kept sorted
// by feature so equal sets share an id.
struct Combination {
  std::vector<std::pair<std::string, std::string>> constraints;
  std::string id;  // 16 hex digits, FNV-1a over the normalized constraints
};

// Throws kValidation for an empty list, a repeated feature or more than
// `max_constraints` entries.
Combination make_combination(std::vector<std::pair<std::string, std::string>> constraints,
                             std::size_t max_constraints = kDefaultMaxConstraints);

struct SubgroupCard {
  Combination combination;
  std::size_t member_count = 0;
  std::size_t positive_count = 0;
  std::optional<double> acceptance_rate;  // nullopt when no member has a known outcome
  bool unfair = false;
};

// Members come from filter_rows; the rate uses `outcomes` (recorded labels
// or predictions), skipping unknown entries.
SubgroupCard build_card(const DataTable& table, const Combination& combination, std::span<const std::int8_t> outcomes,
                        std::size_t max_constraints = kDefaultMaxConstraints, std::size_t k_max = kDefaultMaxBins);

// Ascending rate; undefined rates last; ties by descending member count,
// then by id.
std::vector<SubgroupCard> order_cards(std::vector<SubgroupCard> cards);

// Explicit set/unset of "unfair" marks on known ids.
class FlagSet {
 public:
  // Throws kNotFound when `id` is not in `known`.
  void set(const std::string& id, bool flagged, const std::set<std::string>& known);
  bool get(const std::string& id) const { return ids_.count(id) > 0; }
  const std::set<std::string>& ids() const noexcept { return ids_; }
  void clear() { ids_.clear(); }
  void retain(const std::set<std::string>& known);

 private:
  std::set<std::string> ids_;
};

}  // namespace fairhil
