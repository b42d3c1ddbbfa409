#pragma once

#include "dtprs/tree.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace dtprs {

// Sorted-children print keeping the actual data values. Equal keys <=> equal trees.
std::string raw_key(const DataTree& t);

// Print invariant under data renaming: equivalent trees print identically.
// Values are numbered by first occurrence in the printed text.
std::string canonical_print(const DataTree& t);

// The tree spelled by canonical_print (children sorted, values renumbered).
DataTree canonical_form(const DataTree& t);

// Deduplicating container for exploration states. Buckets by canonical print,
// confirms membership with equivalent().
class StateSet {
 public:
  // Returns (index, inserted).
  std::pair<std::size_t, bool> insert(const DataTree& t);
  std::pair<std::size_t, bool> insert(const DataTree& t, const std::string& key);
  std::optional<std::size_t> find(const DataTree& t) const;
  std::size_t size() const { return trees_.size(); }
  const DataTree& at(std::size_t i) const { return trees_[i]; }

 private:
  std::vector<DataTree> trees_;
  std::unordered_map<std::string, std::vector<std::size_t>> buckets_;
};

}  // namespace dtprs
