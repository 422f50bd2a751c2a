#include "knnod/convergence.hpp"

#include <algorithm>

#include "knnod/equilibria.hpp"
#include "knnod/random.hpp"

namespace knnod {

namespace {

std::vector<Rational> values_of(const Configuration<Rational>& x) { return {x.opinions().begin(), x.opinions().end()}; }

Rational contraction_factor(std::size_t k) { return Rational(1) - Rational(1) / Rational(k); }

/// x -> rule(-x) negated: the given rule seen through the reflection.
UpdateRule<Rational> reflected(const UpdateRule<Rational>& rule) {
  return [rule](const Configuration<Rational>& x, AgentId i, std::size_t k) { return rule(x.negated(), i, k).negated(); };
}

void record_ratio(LemmaReport& report, const Rational& lhs, const Rational& rhs) {
  if (rhs == Rational(0)) return;
  const Rational ratio = lhs / rhs;
  if (!report.worst_ratio || *report.worst_ratio < ratio) report.worst_ratio = ratio;
}

LemmaReport& fail(LemmaReport& report, const Configuration<Rational>& initial, std::size_t k, std::size_t step,
                  std::string message) {
  report.passed = false;
  report.counterexample = Counterexample{values_of(initial), k, step, std::move(message)};
  return report;
}

Rational neighborhood_max(const Configuration<Rational>& x, const NeighborSet& ns) {
  Rational m = x[ns.members.front()];
  for (AgentId j : ns.members) m = std::max(m, x[j]);
  return m;
}

Rational neighborhood_min(const Configuration<Rational>& x, const NeighborSet& ns) {
  Rational m = x[ns.members.front()];
  for (AgentId j : ns.members) m = std::min(m, x[j]);
  return m;
}

/// Runs `steps` updates chosen by `selector` and returns all states.
std::vector<Configuration<Rational>> run_selector(const Configuration<Rational>& initial, std::size_t k,
                                                  std::size_t steps, Selector selector,
                                                  const UpdateRule<Rational>& rule) {
  std::vector<Configuration<Rational>> states{initial};
  for (std::size_t t = 0; t < steps; ++t) {
    const auto& x = states.back();
    states.push_back(rule(x, select_agent(x, selector), k));
  }
  return states;
}

/// Direct check of the max-side statements on a precomputed M-trajectory.
void check_max_side_directly(LemmaReport& report, const Configuration<Rational>& initial, std::size_t k,
                             const std::vector<Configuration<Rational>>& states) {
  const NeighborSet n0 = knn_neighbors(initial, lowest_maximizer(initial), k);
  const auto members0 = n0.sorted_members();
  const Rational z0 = neighborhood_min(initial, n0);
  for (std::size_t t = 0; t < states.size(); ++t) {
    const auto& x = states[t];
    const NeighborSet ns = knn_neighbors(x, lowest_maximizer(x), k);
    if (ns.sorted_members() != members0) {
      fail(report, initial, k, t, "N_M changed under max-updates");
      return;
    }
    if (neighborhood_min(x, ns) != z0) {
      fail(report, initial, k, t, "z changed under max-updates");
      return;
    }
    if (t == 0) continue;
    const auto& prev = states[t - 1];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const AgentId id = AgentId::from_index(i);
      const bool member = std::binary_search(members0.begin(), members0.end(), id);
      if (member && (prev[id] < x[id] || x[id] < z0)) {
        fail(report, initial, k, t, "member of N_M(x(0)) increased or fell below z(0)");
        return;
      }
      if (!member && x[id] != prev[id]) {
        fail(report, initial, k, t, "agent outside N_M(x(0)) moved");
        return;
      }
    }
  }
}

}  // namespace

void LemmaReport::absorb(const LemmaReport& other) {
  checked += other.checked;
  if (passed && !other.passed) {
    passed = false;
    counterexample = other.counterexample;
  }
  if (other.worst_ratio && (!worst_ratio || *worst_ratio < *other.worst_ratio)) worst_ratio = other.worst_ratio;
  if (note.empty()) note = other.note;
}

LemmaReport verify_min_update_monotonicity(const Configuration<Rational>& initial, std::size_t k, std::size_t steps,
                                           const UpdateRule<Rational>& rule) {
  LemmaReport report{"min_update_monotonicity"};
  report.checked = 1;
  const NeighborSet n0 = knn_neighbors(initial, lowest_minimizer(initial), k);
  const auto members0 = n0.sorted_members();
  const Rational y0 = neighborhood_max(initial, n0);

  Configuration<Rational> x = initial;
  for (std::size_t t = 0;; ++t) {
    const AgentId mu = lowest_minimizer(x);
    const NeighborSet ns = knn_neighbors(x, mu, k);
    if (ns.sorted_members() != members0) return fail(report, initial, k, t, "N_mu changed under min-updates");
    if (neighborhood_max(x, ns) != y0) return fail(report, initial, k, t, "y changed under min-updates");
    if (t == steps) break;

    Configuration<Rational> next = rule(x, mu, k);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const AgentId id = AgentId::from_index(i);
      const bool member = std::binary_search(members0.begin(), members0.end(), id);
      if (member && (next[id] < x[id] || y0 < next[id])) {
        return fail(report, initial, k, t + 1, "member of N_mu(x(0)) decreased or exceeded y(0)");
      }
      if (!member && next[id] != x[id]) return fail(report, initial, k, t + 1, "agent outside N_mu(x(0)) moved");
    }
    x = std::move(next);
  }
  return report;
}

LemmaReport verify_min_update_contraction(const Configuration<Rational>& initial, std::size_t k,
                                          const UpdateRule<Rational>& rule) {
  LemmaReport report{"min_update_contraction"};
  report.checked = 1;
  const auto sel0 = extremal_selection(initial, k);
  const auto states = run_selector(initial, k, k - 1, Selector::mu, rule);
  const auto& last = states.back();
  const auto sel = extremal_selection(last, k);

  const Rational lhs = sel.y - last.min();
  const Rational rhs = contraction_factor(k) * (sel0.y - initial.min());
  record_ratio(report, lhs, rhs);
  if (rhs < lhs) fail(report, initial, k, k - 1, "y - min did not contract by (1 - 1/k)");
  return report;
}

LemmaReport verify_max_update_mirror(const Configuration<Rational>& initial, std::size_t k, std::size_t steps,
                                     const UpdateRule<Rational>& rule) {
  LemmaReport report{"max_update_mirror"};
  report.checked = 1;
  const UpdateRule<Rational> mirrored = reflected(rule);
  const Configuration<Rational> reflected_initial = initial.negated();

  // Reflection route: the min-side checks on -x.
  const LemmaReport mono = verify_min_update_monotonicity(reflected_initial, k, steps, mirrored);
  if (!mono.passed) {
    return fail(report, initial, k, mono.counterexample->step, "reflected: " + mono.counterexample->message);
  }
  const LemmaReport contraction = verify_min_update_contraction(reflected_initial, k, mirrored);
  if (!contraction.passed) {
    return fail(report, initial, k, contraction.counterexample->step,
                "reflected: " + contraction.counterexample->message);
  }

  // Direct route, and agreement with the reflection.
  const std::size_t horizon = std::max(steps, k - 1);
  const auto direct = run_selector(initial, k, horizon, Selector::big_m, rule);
  const auto via_min = run_selector(reflected_initial, k, horizon, Selector::mu, mirrored);
  for (std::size_t t = 0; t < direct.size(); ++t) {
    if (direct[t] != via_min[t].negated()) {
      return fail(report, initial, k, t, "max-update trajectory differs from the reflected min-update trajectory");
    }
  }
  check_max_side_directly(report, initial, k,
                          std::vector<Configuration<Rational>>(direct.begin(), direct.begin() + static_cast<std::ptrdiff_t>(steps + 1)));
  if (!report.passed) return report;

  const auto sel0 = extremal_selection(initial, k);
  const auto& last = direct[k - 1];
  const auto sel = extremal_selection(last, k);
  const Rational lhs = last.max() - sel.z;
  const Rational rhs = contraction_factor(k) * (initial.max() - sel0.z);
  record_ratio(report, lhs, rhs);
  if (rhs < lhs) fail(report, initial, k, k - 1, "max - z did not contract by (1 - 1/k)");
  return report;
}

LemmaReport verify_shrink_contraction(const Configuration<Rational>& initial, std::size_t k,
                                      const UpdateRule<Rational>& rule) {
  LemmaReport report{"shrink_contraction"};
  report.checked = 1;
  const auto record = run_shrink_schedule(initial, k, rule);
  const Rational lhs = record.diameters.back();
  const Rational rhs = contraction_factor(k) * record.diameters.front();
  record_ratio(report, lhs, rhs);
  if (initial.size() >= 2 * k) {
    report.note = "n >= 2k: ratio reported, not asserted";
    return report;
  }
  if (rhs < lhs) fail(report, initial, k, record.steps, "diameter did not contract by (1 - 1/k)");
  return report;
}

ZyReport check_z_le_y(std::size_t n, std::size_t k, std::size_t trials, std::uint64_t seed) {
  check_neighborhood_size(n, k);
  ZyReport report{n, k, n < 2 * k};
  if (!report.expect_z_le_y) {
    std::vector<Rational> sorted;
    for (std::size_t i = 0; i < n; ++i) sorted.emplace_back(i);
    Configuration<Rational> witness(std::move(sorted));
    const auto sel = extremal_selection(witness, k);
    report.trials = 1;
    report.passed = sel.y < sel.z;
    report.witness = std::move(witness);
    report.y = sel.y;
    report.z = sel.z;
    return report;
  }

  Rng rng(derive_seed(seed, n * 1024 + k));
  report.passed = true;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    auto x = random_exact_configuration(rng, n);
    const auto sel = extremal_selection(x, k);
    ++report.trials;
    if (sel.y < sel.z) {
      report.passed = false;
      report.witness = std::move(x);
      report.y = sel.y;
      report.z = sel.z;
      break;
    }
  }
  return report;
}

LemmaReport verify_cluster_size_characterization(std::size_t trials, std::uint64_t seed, std::size_t max_n) {
  LemmaReport report{"cluster_size_characterization"};
  Rng rng(seed);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(max_n);
    const std::size_t k = 1 + rng.uniform_index(n);
    const ClusterLayout layout = random_cluster_layout(rng, n);
    const bool by_sizes = *std::min_element(layout.sizes.begin(), layout.sizes.end()) >= k;
    ++report.checked;
    if (clustered_by_neighbors(layout.config, k) != by_sizes) {
      return fail(report, layout.config, k, 0, "neighbor homogeneity disagrees with min cluster size >= k");
    }
    if (by_sizes && !is_equilibrium(layout.config, k)) {
      return fail(report, layout.config, k, 0, "clustered configuration is not an equilibrium");
    }
  }
  return report;
}

SuiteReport run_lemma_suite(std::uint64_t seed, std::size_t trials, const UpdateRule<Rational>& rule) {
  SuiteReport suite{seed, trials, {}};
  suite.checks.push_back(verify_cluster_size_characterization(trials, derive_seed(seed, 1)));

  LemmaReport mono{"min_update_monotonicity"};
  LemmaReport contraction{"min_update_contraction"};
  LemmaReport mirror{"max_update_mirror"};
  Rng rng(derive_seed(seed, 2));
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(12);
    const std::size_t k = 1 + rng.uniform_index(n);
    const auto x = random_exact_configuration(rng, n);
    mono.absorb(verify_min_update_monotonicity(x, k, 2 * k + 2, rule));
    contraction.absorb(verify_min_update_contraction(x, k, rule));
    mirror.absorb(verify_max_update_mirror(x, k, 2 * k + 2, rule));
  }
  suite.checks.push_back(mono);
  suite.checks.push_back(contraction);
  suite.checks.push_back(mirror);

  LemmaReport zy{"z_le_y_iff_n_lt_2k"};
  for (std::size_t n = 2; n <= 12; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      const ZyReport r = check_z_le_y(n, k, trials, derive_seed(seed, 3));
      zy.checked += r.trials;
      if (zy.passed && !r.passed) {
        zy.passed = false;
        zy.counterexample = Counterexample{values_of(*r.witness), k, 0,
                                           r.expect_z_le_y ? "z > y although n < 2k" : "witness failed to give z > y"};
      }
    }
  }
  suite.checks.push_back(zy);

  LemmaReport shrink{"shrink_contraction"};
  Rng shrink_rng(derive_seed(seed, 4));
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t k = 1 + shrink_rng.uniform_index(8);
    const std::size_t n = k + shrink_rng.uniform_index(k);  // k <= n < 2k
    shrink.absorb(verify_shrink_contraction(random_exact_configuration(shrink_rng, n), k, rule));
  }
  suite.checks.push_back(shrink);
  return suite;
}

}  // namespace knnod
