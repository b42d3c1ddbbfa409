#include "dtprs/canon.hpp"

#include "dtprs/frontend.hpp"
#include "dtprs/order.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace dtprs {

namespace {

struct Rendering {
  std::string text;
  std::vector<std::vector<NodeId>> sorted_children;
};

// Prints t with children sorted (tags before data, then by text) and values mapped through f.
Rendering render(const DataTree& t, const std::map<DataValue, DataValue>& f) {
  Rendering r;
  r.sorted_children.resize(t.size());
  std::vector<std::string> text(t.size());
  auto order = t.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId n = *it;
    const auto& l = t.label(n);
    if (l.is_data()) {
      text[n] = "@" + std::to_string(f.empty() ? l.value : f.at(l.value));
      continue;
    }
    std::string s = "[" + format_ident(l.tag) + "]";
    auto ch = t.children(n);
    std::vector<NodeId> kids(ch.begin(), ch.end());
    std::sort(kids.begin(), kids.end(), [&](NodeId a, NodeId b) {
      const bool da = t.label(a).is_data(), db = t.label(b).is_data();
      if (da != db) return !da;
      return text[a] < text[b];
    });
    if (!kids.empty()) {
      s += "(";
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) s += ", ";
        s += text[kids[i]];
      }
      s += ")";
    }
    text[n] = std::move(s);
    r.sorted_children[n] = std::move(kids);
  }
  r.text = t.empty() ? std::string{} : std::move(text[0]);
  return r;
}

std::map<DataValue, DataValue> first_occurrence(const DataTree& t, const Rendering& r) {
  std::map<DataValue, DataValue> out;
  std::vector<NodeId> stack{0};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    if (t.label(n).is_data()) {
      out.emplace(t.label(n).value, static_cast<DataValue>(out.size()));
      continue;
    }
    const auto& kids = r.sorted_children[n];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

// Renumber by first occurrence and re-sort until the text is stable.
std::pair<std::string, std::map<DataValue, DataValue>> normalize(const DataTree& t,
                                                                  std::map<DataValue, DataValue> f) {
  Rendering r = render(t, f);
  std::vector<std::string> seen{r.text};
  std::string best = r.text;
  auto best_f = f;
  for (int iter = 0; iter < 64; ++iter) {
    // Compose: first-occurrence order is over original values, read off the current sort.
    std::map<DataValue, DataValue> g = first_occurrence(t, r);
    Rendering next = render(t, g);
    if (next.text == r.text) return {next.text, g};
    if (std::find(seen.begin(), seen.end(), next.text) != seen.end()) break;
    seen.push_back(next.text);
    if (next.text < best) {
      best = next.text;
      best_f = g;
    }
    r = std::move(next);
  }
  // Oscillation: the minimum text of the cycle is still a function of the input.
  return {best, best_f};
}

class Canonizer {
 public:
  explicit Canonizer(const DataTree& t) : t_(t) {
    values_ = t.data_values();
    const int n = static_cast<int>(t.size());
    nv_ = n + static_cast<int>(values_.size());
    adj_.resize(nv_);
    std::map<DataValue, int> vid;
    for (std::size_t i = 0; i < values_.size(); ++i) vid[values_[i]] = n + static_cast<int>(i);
    for (NodeId v = 0; v < n; ++v) {
      if (t.parent(v) != kNoNode) {
        adj_[v].push_back(t.parent(v));
        adj_[t.parent(v)].push_back(v);
      }
      if (t.label(v).is_data()) {
        adj_[v].push_back(vid[t.label(v).value]);
        adj_[vid[t.label(v).value]].push_back(v);
      }
    }
    // Initial colours: rank of (kind, tag) for tree nodes; values share one colour.
    std::vector<std::pair<int, std::string>> keys(nv_);
    for (int v = 0; v < nv_; ++v) {
      if (v < n)
        keys[v] = t.label(v).is_tag() ? std::make_pair(0, t.label(v).tag) : std::make_pair(1, std::string{});
      else
        keys[v] = {2, {}};
    }
    auto sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    colours_.resize(nv_);
    for (int v = 0; v < nv_; ++v)
      colours_[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[v]) - sorted.begin());
  }

  std::pair<std::string, std::map<DataValue, DataValue>> run() {
    search(colours_);
    return {best_, best_f_};
  }

 private:
  void refine(std::vector<int>& col) const {
    int classes = count_classes(col);
    while (true) {
      std::vector<std::vector<int>> sig(nv_);
      for (int v = 0; v < nv_; ++v) {
        sig[v].reserve(adj_[v].size() + 1);
        sig[v].push_back(col[v]);
        std::vector<int> nb;
        for (int w : adj_[v]) nb.push_back(col[w]);
        std::sort(nb.begin(), nb.end());
        sig[v].insert(sig[v].end(), nb.begin(), nb.end());
      }
      auto sorted = sig;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      for (int v = 0; v < nv_; ++v)
        col[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sig[v]) - sorted.begin());
      const int next = static_cast<int>(sorted.size());
      if (next == classes) return;
      classes = next;
    }
  }

  static int count_classes(const std::vector<int>& col) {
    std::vector<int> c = col;
    std::sort(c.begin(), c.end());
    return static_cast<int>(std::unique(c.begin(), c.end()) - c.begin());
  }

  void search(std::vector<int> col) {
    if (leaves_ >= kLeafLimit) return;
    refine(col);
    const int n = static_cast<int>(t_.size());
    // Pick the smallest colour shared by several value vertices.
    std::map<int, std::vector<int>> classes;
    for (int v = n; v < nv_; ++v) classes[col[v]].push_back(v);
    for (const auto& [c, members] : classes) {
      if (members.size() < 2) continue;
      const int fresh = *std::max_element(col.begin(), col.end()) + 1;
      for (int v : members) {
        auto next = col;
        next[v] = fresh;
        search(std::move(next));
      }
      return;
    }
    ++leaves_;
    std::map<DataValue, DataValue> f;
    for (int v = n; v < nv_; ++v) f[values_[v - n]] = static_cast<DataValue>(col[v]);
    auto [text, g] = normalize(t_, f);
    if (!have_ || text < best_) {
      best_ = std::move(text);
      best_f_ = std::move(g);
      have_ = true;
    }
  }

  static constexpr long kLeafLimit = 20000;
  const DataTree& t_;
  std::vector<DataValue> values_;
  int nv_ = 0;
  std::vector<std::vector<int>> adj_;
  std::vector<int> colours_;
  long leaves_ = 0;
  bool have_ = false;
  std::string best_;
  std::map<DataValue, DataValue> best_f_;
};

}  // namespace

std::string raw_key(const DataTree& t) { return render(t, {}).text; }

std::string canonical_print(const DataTree& t) {
  if (t.empty()) return {};
  return Canonizer(t).run().first;
}

DataTree canonical_form(const DataTree& t) {
  if (t.empty()) return t;
  auto [text, f] = Canonizer(t).run();
  Rendering r = render(t, f);
  const auto& rl = t.label(0);
  DataTree out(rl.is_data() ? Label::make_data(f.at(rl.value)) : rl);
  std::vector<std::pair<NodeId, NodeId>> stack;
  for (auto it = r.sorted_children[0].rbegin(); it != r.sorted_children[0].rend(); ++it) stack.emplace_back(*it, 0);
  // Preorder copy so node ids follow the printed order.
  while (!stack.empty()) {
    auto [n, parent] = stack.back();
    stack.pop_back();
    const auto& l = t.label(n);
    const NodeId id = out.add_child(parent, l.is_data() ? Label::make_data(f.at(l.value)) : l);
    const auto& kids = r.sorted_children[n];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.emplace_back(*it, id);
  }
  return out;
}

std::pair<std::size_t, bool> StateSet::insert(const DataTree& t) { return insert(t, canonical_print(t)); }

std::pair<std::size_t, bool> StateSet::insert(const DataTree& t, const std::string& key) {
  auto& bucket = buckets_[key];
  for (std::size_t i : bucket)
    if (equivalent(trees_[i], t)) return {i, false};
  trees_.push_back(t);
  bucket.push_back(trees_.size() - 1);
  return {trees_.size() - 1, true};
}

std::optional<std::size_t> StateSet::find(const DataTree& t) const {
  auto it = buckets_.find(canonical_print(t));
  if (it == buckets_.end()) return std::nullopt;
  for (std::size_t i : it->second)
    if (equivalent(trees_[i], t)) return i;
  return std::nullopt;
}

}  // namespace dtprs
