#include "screening/matching.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

namespace screening {

__int128 exact_value(double v) {
  // Scaling by a power of two is exact; only sub-2^-64 residue is rounded.
  const double scaled = std::nearbyint(std::ldexp(v, 64));
  return static_cast<__int128>(scaled);
}

bool Solution::contains(ItemId id) const { return property_of(id).has_value(); }

std::optional<PropertyIndex> Solution::property_of(ItemId id) const {
  auto it = std::lower_bound(assignment.begin(), assignment.end(), id,
                             [](const Assignment& a, ItemId x) { return a.item < x; });
  if (it == assignment.end() || it->item != id) return std::nullopt;
  return it->property;
}

std::vector<std::vector<ItemId>> Solution::per_property(std::size_t d) const {
  std::vector<std::vector<ItemId>> out(d);
  for (const Assignment& a : assignment) {
    if (a.property < d) out[a.property].push_back(a.item);
  }
  return out;
}

std::size_t Solution::real_count() const {
  return static_cast<std::size_t>(std::count_if(assignment.begin(), assignment.end(),
                                                [](const Assignment& a) { return !is_dummy_id(a.item); }));
}

std::vector<ItemId> Solution::real_ids() const {
  std::vector<ItemId> ids;
  for (const Assignment& a : assignment) {
    if (!is_dummy_id(a.item)) ids.push_back(a.item);
  }
  return ids;
}

bool EntryPrices::may_enter(const Item& candidate) const {
  if (prices_.empty()) return true;
  for (const PropValue& pv : candidate.props) {
    if (pv.property >= prices_.size()) continue;
    if (!(item_key(candidate.id, pv.value) < prices_[pv.property])) return true;
  }
  return false;
}

namespace {

using Key = ObjectiveKey;

struct Candidate {
  ItemId id = 0;
  std::size_t source = 0;                            // index into the caller's items
  std::vector<std::pair<PropertyIndex, Key>> arcs;  // ascending property; gain of each arc
};

struct FlowOutcome {
  Key total;                     // total gain of the optimum
  std::vector<int> assigned;     // per candidate: property or -1
  std::vector<char> ambiguous;   // per candidate: lies on a zero-cost residual cycle
  bool has_ties = false;
  std::vector<Key> prices;       // per property
};

// Successive shortest augmenting paths on
//   source -> property p (cap k_p) -> item (cap 1) -> sink (cap 1)
//   property p -> dummy pool (cap k_p) -> sink (cap k)
// with arc cost = -gain. Costs are exact, so Dijkstra on reduced costs with
// potentials is exact too.
class AssignmentNetwork {
 public:
  AssignmentNetwork(const std::vector<std::uint32_t>& caps, const std::vector<Candidate>& cands)
      : d_(static_cast<int>(caps.size())), m_(static_cast<int>(cands.size())) {
    source_ = 0;
    dummy_ = d_ + m_ + 1;
    sink_ = d_ + m_ + 2;
    out_.resize(static_cast<std::size_t>(sink_) + 1);
    for (int p = 0; p < d_; ++p) {
      add_arc(source_, property_node(p), static_cast<int>(caps[p]), Key{});
      k_ += caps[p];
    }
    for (int c = 0; c < m_; ++c) {
      for (const auto& [p, gain] : cands[c].arcs) {
        add_arc(property_node(static_cast<int>(p)), item_node(c), 1, -gain);
      }
      add_arc(item_node(c), sink_, 1, Key{});
    }
    for (int p = 0; p < d_; ++p) add_arc(property_node(p), dummy_, static_cast<int>(caps[p]), Key{});
    add_arc(dummy_, sink_, static_cast<int>(k_), Key{});
  }

  FlowOutcome solve(bool analyze) {
    init_potentials();
    std::size_t flow = 0;
    while (flow < k_) flow += augment(k_ - flow);

    FlowOutcome out;
    for (std::size_t e = 0; e < arcs_.size(); e += 2) {
      const Arc& a = arcs_[e];
      const int used = arcs_[e + 1].cap;
      if (used > 0) out.total = out.total - Key{a.cost.value * used, a.cost.id_sum * used, a.cost.aux * used};
    }
    out.assigned.assign(static_cast<std::size_t>(m_), -1);
    for (int c = 0; c < m_; ++c) {
      for (int e : out_[item_node(c)]) {
        // Reverse arcs back to a property node carry capacity iff flow is on it.
        const Arc& a = arcs_[e];
        if ((e & 1) && a.to >= 1 && a.to <= d_ && a.cap > 0) out.assigned[c] = a.to - 1;
      }
    }
    if (analyze) {
      out.prices.resize(static_cast<std::size_t>(d_));
      for (int p = 0; p < d_; ++p) out.prices[p] = pot_[property_node(p)] - pot_[sink_];
      mark_ambiguous(out);
    }
    return out;
  }

 private:
  struct Arc {
    int from;
    int to;
    int cap;
    Key cost;
  };

  int property_node(int p) const { return 1 + p; }
  int item_node(int c) const { return 1 + d_ + c; }
  int node_count() const { return sink_ + 1; }

  void add_arc(int from, int to, int cap, Key cost) {
    out_[from].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({from, to, cap, cost});
    out_[to].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({to, from, 0, -cost});
  }

  Key reduced(const Arc& a) const { return a.cost + pot_[a.from] - pot_[a.to]; }

  // Shortest distances from the source on the initial (acyclic) network.
  void init_potentials() {
    pot_.assign(static_cast<std::size_t>(node_count()), Key{});
    Key sink_pot{};
    for (int c = 0; c < m_; ++c) {
      Key best{};
      bool any = false;
      for (int e : out_[item_node(c)]) {
        if (!(e & 1)) continue;  // reverse arcs of property->item arcs
        const Arc& fwd = arcs_[e ^ 1];
        if (fwd.from > d_ || fwd.from < 1) continue;
        if (!any || fwd.cost < best) best = fwd.cost;
        any = true;
      }
      pot_[item_node(c)] = best;
      if (best < sink_pot) sink_pot = best;
    }
    pot_[sink_] = sink_pot;
  }

  std::size_t augment(std::size_t want) {
    const int n = node_count();
    std::vector<Key> dist(static_cast<std::size_t>(n));
    std::vector<char> reached(static_cast<std::size_t>(n), 0);
    std::vector<char> done(static_cast<std::size_t>(n), 0);
    std::vector<int> via(static_cast<std::size_t>(n), -1);
    using Entry = std::pair<Key, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[source_] = Key{};
    reached[source_] = 1;
    heap.push({Key{}, source_});
    while (!heap.empty()) {
      auto [du, u] = heap.top();
      heap.pop();
      if (done[u]) continue;
      done[u] = 1;
      for (int e : out_[u]) {
        const Arc& a = arcs_[e];
        if (a.cap <= 0 || done[a.to]) continue;
        const Key nd = du + reduced(a);
        if (!reached[a.to] || nd < dist[a.to]) {
          dist[a.to] = nd;
          reached[a.to] = 1;
          via[a.to] = e;
          heap.push({nd, a.to});
        }
      }
    }
    if (!reached[sink_]) throw std::logic_error("assignment network lost its dummy route");

    Key farthest{};
    for (int v = 0; v < n; ++v) {
      if (reached[v] && farthest < dist[v]) farthest = dist[v];
    }
    for (int v = 0; v < n; ++v) pot_[v] = pot_[v] + (reached[v] ? dist[v] : farthest);

    std::size_t push = want;
    for (int v = sink_; v != source_; v = arcs_[via[v]].from) {
      push = std::min(push, static_cast<std::size_t>(arcs_[via[v]].cap));
    }
    for (int v = sink_; v != source_; v = arcs_[via[v]].from) {
      arcs_[via[v]].cap -= static_cast<int>(push);
      arcs_[via[v] ^ 1].cap += static_cast<int>(push);
    }
    return push;
  }

  // Two optima differ only along residual cycles whose arcs all have zero
  // reduced cost, so an item can change status only if its node sits in a
  // non-trivial strongly connected component of the tight residual graph.
  void mark_ambiguous(FlowOutcome& out) const {
    const int n = node_count();
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    std::vector<int> comp_size;
    int counter = 0;

    auto tight = [&](int e) { return arcs_[e].cap > 0 && reduced(arcs_[e]) == Key{}; };

    struct Frame {
      int node;
      std::size_t next;
    };
    for (int root = 0; root < n; ++root) {
      if (index[root] >= 0) continue;
      std::vector<Frame> frames{{root, 0}};
      index[root] = low[root] = counter++;
      stack.push_back(root);
      on_stack[root] = 1;
      while (!frames.empty()) {
        Frame& f = frames.back();
        const int u = f.node;
        if (f.next < out_[u].size()) {
          const int e = out_[u][f.next++];
          if (!tight(e)) continue;
          const int v = arcs_[e].to;
          if (index[v] < 0) {
            index[v] = low[v] = counter++;
            stack.push_back(v);
            on_stack[v] = 1;
            frames.push_back({v, 0});
          } else if (on_stack[v]) {
            low[u] = std::min(low[u], index[v]);
          }
          continue;
        }
        if (low[u] == index[u]) {
          const int id = static_cast<int>(comp_size.size());
          int size = 0;
          int w = -1;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = id;
            ++size;
          } while (w != u);
          comp_size.push_back(size);
        }
        frames.pop_back();
        if (!frames.empty()) {
          const int parent = frames.back().node;
          low[parent] = std::min(low[parent], low[u]);
        }
      }
    }
    out.ambiguous.assign(static_cast<std::size_t>(m_), 0);
    for (int c = 0; c < m_; ++c) {
      if (comp_size[comp[item_node(c)]] > 1) {
        out.ambiguous[c] = 1;
        out.has_ties = true;
      }
    }
  }

  int d_;
  int m_;
  int source_ = 0;
  int dummy_ = 0;
  int sink_ = 0;
  std::size_t k_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> out_;
  std::vector<Key> pot_;
};

void check_items(std::span<const Item> items, const ConstraintSpec& spec) {
  std::unordered_set<ItemId> seen;
  seen.reserve(items.size());
  for (const Item& item : items) {
    if (is_dummy_id(item.id)) {
      throw InputError(fmt::format("item id {} lies in the reserved dummy range", item.id));
    }
    if (!seen.insert(item.id).second) throw InputError(fmt::format("duplicate item id {}", item.id));
    for (const PropValue& pv : item.props) {
      if (pv.property >= spec.d()) {
        throw InputError(fmt::format("item {} references property {} but d = {}", item.id, pv.property, spec.d()));
      }
    }
  }
}

Solution build_solution(std::span<const Item> items, const ConstraintSpec& spec,
                        std::vector<std::pair<std::size_t, PropertyIndex>> reals) {
  // reals: (index into items, property)
  std::sort(reals.begin(), reals.end(),
            [&](const auto& a, const auto& b) { return items[a.first].id < items[b.first].id; });
  Solution sol;
  std::vector<std::uint32_t> left = spec.caps();
  for (const auto& [idx, p] : reals) {
    sol.assignment.push_back({items[idx].id, p});
    sol.value += *items[idx].value(p);
    --left[p];
  }
  ItemId next_dummy = kDummyIdBase;
  for (std::size_t p = 0; p < spec.d(); ++p) {
    for (std::uint32_t j = 0; j < left[p]; ++j) {
      sol.assignment.push_back({next_dummy++, static_cast<PropertyIndex>(p)});
    }
  }
  return sol;
}

// Single property: the optimum is the top-k by (value, id), with every real
// item preferred over a dummy.
OptimumWithPrices solve_single_property(std::span<const Item> items, const ConstraintSpec& spec) {
  std::vector<std::pair<Key, std::size_t>> ranked;
  ranked.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (auto v = items[i].value(0)) ranked.push_back({item_key(items[i].id, *v), i});
  }
  const std::size_t k = spec.k();
  const std::size_t take = std::min(k, ranked.size());
  auto by_key_desc = [](const auto& a, const auto& b) { return b.first < a.first; };
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(),
                    by_key_desc);
  std::vector<std::pair<std::size_t, PropertyIndex>> reals;
  for (std::size_t j = 0; j < take; ++j) reals.push_back({ranked[j].second, 0});
  OptimumWithPrices out;
  out.solution = build_solution(items, spec, std::move(reals));
  out.prices = EntryPrices({take == k && k > 0 ? ranked[k - 1].first : Key{}});
  return out;
}

std::vector<Candidate> make_candidates(std::span<const Item> items) {
  std::vector<Candidate> cands;
  cands.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].props.empty()) continue;
    Candidate c{items[i].id, i, {}};
    for (const PropValue& pv : items[i].props) c.arcs.push_back({pv.property, item_key(items[i].id, pv.value)});
    cands.push_back(std::move(c));
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  return cands;
}

// Picks the canonical optimum when the base solve found zero-cost cycles.
// Pinning uses the auxiliary objective component: every arc of a pinned item
// earns aux = 1, and a pin set is achievable at optimal value exactly when the
// re-solve keeps the optimal (value, id_sum) and matches every pinned item.
std::vector<std::pair<std::size_t, PropertyIndex>> resolve_ties(const std::vector<Candidate>& cands,
                                                                const FlowOutcome& base,
                                                                const ConstraintSpec& spec) {
  const std::size_t m = cands.size();
  const Key target{base.total.value, base.total.id_sum, 0};

  auto optimal_with = [&](const std::vector<Candidate>& trial, std::int64_t pinned) {
    AssignmentNetwork net(spec.caps(), trial);
    const Key got = net.solve(false).total;
    return got.value == target.value && got.id_sum == target.id_sum && got.aux == pinned;
  };
  auto pinned_copy = [](const Candidate& c) {
    Candidate out = c;
    for (auto& arc : out.arcs) arc.second.aux = 1;
    return out;
  };

  // Membership: smallest feasible ids first.
  std::vector<char> in(m, 0), out(m, 0);
  std::size_t selected = 0;
  for (std::size_t c = 0; c < m; ++c) {
    if (base.ambiguous[c]) continue;
    if (base.assigned[c] >= 0) {
      in[c] = 1;
      ++selected;
    } else {
      out[c] = 1;
    }
  }
  std::vector<std::size_t> forced;
  for (std::size_t c = 0; c < m; ++c) {
    if (!base.ambiguous[c]) continue;
    if (selected == spec.k()) {
      out[c] = 1;
      continue;
    }
    std::vector<Candidate> trial;
    for (std::size_t j = 0; j < m; ++j) {
      if (out[j]) continue;
      const bool pin = j == c || std::find(forced.begin(), forced.end(), j) != forced.end();
      trial.push_back(pin ? pinned_copy(cands[j]) : cands[j]);
    }
    if (optimal_with(trial, static_cast<std::int64_t>(forced.size() + 1))) {
      forced.push_back(c);
      in[c] = 1;
      ++selected;
    } else {
      out[c] = 1;
    }
  }

  // Properties: smallest property for the smallest id first.
  std::vector<int> fixed_property(m, -1);
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < m; ++c) {
    if (in[c]) chosen.push_back(c);
  }
  const auto pinned_total = static_cast<std::int64_t>(chosen.size());
  for (std::size_t c : chosen) {
    if (!base.ambiguous[c]) fixed_property[c] = base.assigned[c];
  }
  for (std::size_t c : chosen) {
    if (fixed_property[c] >= 0) continue;
    const auto& arcs = cands[c].arcs;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      if (a + 1 == arcs.size()) {
        fixed_property[c] = static_cast<int>(arcs[a].first);
        break;
      }
      std::vector<Candidate> trial;
      for (std::size_t j : chosen) {
        Candidate cand = pinned_copy(cands[j]);
        const int want = j == c ? static_cast<int>(arcs[a].first) : fixed_property[j];
        if (want >= 0) {
          std::erase_if(cand.arcs, [&](const auto& arc) { return static_cast<int>(arc.first) != want; });
        }
        trial.push_back(std::move(cand));
      }
      if (optimal_with(trial, pinned_total)) {
        fixed_property[c] = static_cast<int>(arcs[a].first);
        break;
      }
    }
  }

  std::vector<std::pair<std::size_t, PropertyIndex>> reals;
  for (std::size_t c : chosen) {
    reals.push_back({cands[c].source, static_cast<PropertyIndex>(fixed_property[c])});
  }
  return reals;
}

OptimumWithPrices solve(std::span<const Item> items, const ConstraintSpec& spec) {
  check_items(items, spec);
  if (spec.d() == 1) return solve_single_property(items, spec);

  const std::vector<Candidate> cands = make_candidates(items);
  AssignmentNetwork net(spec.caps(), cands);
  const FlowOutcome base = net.solve(true);

  std::vector<std::pair<std::size_t, PropertyIndex>> reals;
  if (base.has_ties) {
    reals = resolve_ties(cands, base, spec);
  } else {
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (base.assigned[c] >= 0) reals.push_back({cands[c].source, static_cast<PropertyIndex>(base.assigned[c])});
    }
  }
  OptimumWithPrices out;
  out.solution = build_solution(items, spec, std::move(reals));
  out.prices = EntryPrices(base.prices);
  return out;
}

}  // namespace

Solution optimal_matching(std::span<const Item> items, const ConstraintSpec& spec) {
  return solve(items, spec).solution;
}

OptimumWithPrices optimal_matching_with_prices(std::span<const Item> items, const ConstraintSpec& spec) {
  return solve(items, spec);
}

Solution brute_force_matching(std::span<const Item> items, const ConstraintSpec& spec) {
  if (items.size() > kBruteForceMaxItems || spec.k() > kBruteForceMaxK) {
    throw RefusalError(fmt::format("brute force limited to n <= {} and k <= {} (got n = {}, k = {})",
                                   kBruteForceMaxItems, kBruteForceMaxK, items.size(), spec.k()));
  }
  check_items(items, spec);

  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return items[a].id < items[b].id; });

  struct Ranked {
    Key key;
    std::vector<ItemId> ids;            // sorted, dummies appended
    std::vector<PropertyIndex> props;   // aligned with ids
    std::vector<std::pair<std::size_t, PropertyIndex>> reals;
  };
  // True if a ranks strictly better than b.
  auto better = [](const Ranked& a, const Ranked& b) {
    if (a.key != b.key) return b.key < a.key;
    if (a.ids != b.ids) return a.ids < b.ids;
    return a.props < b.props;
  };

  std::optional<Ranked> best;
  std::vector<std::uint32_t> left = spec.caps();
  std::vector<std::pair<std::size_t, PropertyIndex>> chosen;

  std::function<void(std::size_t)> visit = [&](std::size_t pos) {
    if (pos == order.size()) {
      Ranked r;
      for (const auto& [idx, p] : chosen) {
        r.key = r.key + item_key(items[idx].id, *items[idx].value(p));
        r.ids.push_back(items[idx].id);
        r.props.push_back(p);
      }
      ItemId next_dummy = kDummyIdBase;
      for (std::size_t p = 0; p < spec.d(); ++p) {
        for (std::uint32_t j = 0; j < left[p]; ++j) {
          r.ids.push_back(next_dummy++);
          r.props.push_back(static_cast<PropertyIndex>(p));
        }
      }
      r.reals = chosen;
      if (!best || better(r, *best)) best = std::move(r);
      return;
    }
    const std::size_t idx = order[pos];
    visit(pos + 1);
    for (const PropValue& pv : items[idx].props) {
      if (left[pv.property] == 0) continue;
      --left[pv.property];
      chosen.push_back({idx, pv.property});
      visit(pos + 1);
      chosen.pop_back();
      ++left[pv.property];
    }
  };
  visit(0);
  return build_solution(items, spec, best->reals);
}

__int128 exact_solution_value(const Solution& sol, const Instance& inst) {
  __int128 total = 0;
  for (const Assignment& a : sol.assignment) {
    if (is_dummy_id(a.item)) continue;
    if (a.item >= inst.size() || inst.items[a.item].id != a.item) {
      throw InputError(fmt::format("item {} is not at its arrival position", a.item));
    }
    auto v = inst.items[a.item].value(a.property);
    if (!v) throw InputError(fmt::format("item {} lacks assigned property {}", a.item, a.property));
    total += exact_value(*v);
  }
  return total;
}

double recompute_value(const Solution& sol, std::span<const Item> items, const ConstraintSpec& spec) {
  std::vector<std::uint32_t> filled(spec.d(), 0);
  std::unordered_set<ItemId> seen;
  double total = 0.0;
  for (const Assignment& a : sol.assignment) {
    if (a.property >= spec.d()) throw InputError(fmt::format("assignment to unknown property {}", a.property));
    if (!seen.insert(a.item).second) throw InputError(fmt::format("item {} assigned twice", a.item));
    ++filled[a.property];
    if (is_dummy_id(a.item)) continue;
    auto it = std::find_if(items.begin(), items.end(), [&](const Item& x) { return x.id == a.item; });
    if (it == items.end()) throw InputError(fmt::format("assigned item {} not among the items", a.item));
    auto v = it->value(a.property);
    if (!v) throw InputError(fmt::format("item {} lacks assigned property {}", a.item, a.property));
    total += *v;
  }
  for (std::size_t p = 0; p < spec.d(); ++p) {
    if (filled[p] != spec.cap(static_cast<PropertyIndex>(p))) {
      throw InputError(fmt::format("property {} has {} items, capacity {}", p, filled[p], spec.cap(static_cast<PropertyIndex>(p))));
    }
  }
  return total;
}

}  // namespace screening
