#include "voltsense/cla.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "voltsense/lpcore.hpp"

namespace vsp::cla {

using nlohmann::json;

namespace {

// Rows of the regression design: (1, P_1..P_m, Q_1..Q_m) per sample.
struct FitData {
  std::vector<const pflow::InjectionVector*> x;
  std::vector<double> y;
  std::size_t dim = 0;  // 1 + 2m
};

double output_of(const pflow::PFSolution& sol, std::size_t bus_index,
                 OutputKind kind) {
  double v = sol.v[bus_index];
  return kind == OutputKind::V_squared ? v * v : v;
}

FitData gather(const TrainingRef& t, const net::Network& net, int bus,
               OutputKind kind) {
  FitData d;
  std::size_t bus_index = net.index_of(bus);
  d.dim = 1 + 2 * net.n_pq();
  const auto& base = *t.base;
  d.x.reserve(base.size() + t.extra_used.size());
  d.y.reserve(base.size() + t.extra_used.size());
  for (std::size_t s = 0; s < base.size(); ++s) {
    d.x.push_back(&base.injections[s]);
    d.y.push_back(output_of(base.solutions[s], bus_index, kind));
  }
  for (std::uint32_t e : t.extra_used) {
    d.x.push_back(&t.extra->injections[e]);
    d.y.push_back(output_of(t.extra->solutions[e], bus_index, kind));
  }
  return d;
}

double row_dot(const pflow::InjectionVector& inj, double a0,
               const std::vector<double>& a1) {
  const std::size_t m = inj.p.size();
  double acc = a0;
  for (std::size_t j = 0; j < m; ++j) acc += a1[j] * inj.p[j];
  for (std::size_t j = 0; j < m; ++j) acc += a1[m + j] * inj.q[j];
  return acc;
}

// Exact L1 fit via the dual of the one-sided regression LP. The dual has one
// column per sample and 1 + 2m equality rows whose multipliers are the fit
// coefficients, so the basis stays small even for thousands of samples.
void fit_coefficients(const FitData& d, Direction dir, double& a0,
                      std::vector<double>& a1, double& l1_error) {
  const std::size_t n = d.x.size();
  const std::size_t m2 = d.dim - 1;
  const std::size_t m = m2 / 2;
  a1.assign(m2, 0.0);

  if (n < 2) fail(ErrorCode::validation, "cla fit needs at least 2 samples");

  double ymin = *std::min_element(d.y.begin(), d.y.end());
  double ymax = *std::max_element(d.y.begin(), d.y.end());
  if (ymax - ymin <= 1e-14) {  // flat target: a constant interpolates exactly
    a0 = dir == Direction::over ? ymax : ymin;
    l1_error = 0.0;
    return;
  }

  lp::LinearModel model;
  model.set_name("cla_fit_dual");
  for (std::size_t s = 0; s < n; ++s)
    model.add_var("l" + std::to_string(s), 0.0, lp::kInf);

  // Equality rows: sum_s lambda_s * row_s = sum_s row_s, one per coefficient.
  std::vector<std::vector<lp::Term>> rows(d.dim);
  std::vector<double> rhs(d.dim, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& inj = *d.x[s];
    rows[0].push_back({static_cast<int>(s), 1.0});
    rhs[0] += 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (inj.p[j] != 0.0) rows[1 + j].push_back({static_cast<int>(s), inj.p[j]});
      rhs[1 + j] += inj.p[j];
      if (inj.q[j] != 0.0)
        rows[1 + m + j].push_back({static_cast<int>(s), inj.q[j]});
      rhs[1 + m + j] += inj.q[j];
    }
  }
  for (std::size_t k = 0; k < d.dim; ++k)
    model.add_constraint("c" + std::to_string(k), std::move(rows[k]),
                         lp::Relation::eq, rhs[k]);

  std::vector<lp::Term> obj;
  obj.reserve(n);
  for (std::size_t s = 0; s < n; ++s) obj.push_back({static_cast<int>(s), d.y[s]});
  model.set_objective(dir == Direction::over ? lp::Sense::maximize
                                             : lp::Sense::minimize,
                      std::move(obj));

  lp::SolveResult res = lp::solve_lp(model);
  if (res.status != lp::SolveStatus::optimal)
    fail(ErrorCode::numeric, "cla fit LP did not reach optimality");

  a0 = res.duals[0];
  for (std::size_t k = 0; k < m2; ++k) a1[k] = res.duals[1 + k];

  // Snap onto the conservative side; the shift is at most the LP tolerance.
  double worst = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double r = row_dot(*d.x[s], a0, a1) - d.y[s];
    worst = dir == Direction::over ? std::min(worst, r) : std::max(worst, r);
  }
  a0 -= worst;

  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s)
    total += std::abs(row_dot(*d.x[s], a0, a1) - d.y[s]);
  l1_error = total / static_cast<double>(n);
}

// Coefficients on zero-width box coordinates are unconstrained by the data;
// fold them into the intercept so they cannot leak outside the box.
void fold_degenerate_coords(const sampling::InjectionRange& range, double& a0,
                            std::vector<double>& a1) {
  const std::size_t m = range.size();
  for (std::size_t j = 0; j < m; ++j) {
    if (range.p_max[j] - range.p_min[j] <= 0.0 && a1[j] != 0.0) {
      a0 += a1[j] * range.p_min[j];
      a1[j] = 0.0;
    }
    if (range.q_max[j] - range.q_min[j] <= 0.0 && a1[m + j] != 0.0) {
      a0 += a1[m + j] * range.q_min[j];
      a1[m + j] = 0.0;
    }
  }
}

}  // namespace

CLA fit_cla(const std::shared_ptr<const sampling::SampleSet>& samples,
            const net::Network& net, int bus, Direction direction,
            OutputKind output_kind) {
  auto t0 = std::chrono::steady_clock::now();
  CLA c;
  c.bus = bus;
  c.direction = direction;
  c.output_kind = output_kind;
  c.trained_on.base = samples;

  FitData d = gather(c.trained_on, net, bus, output_kind);
  fit_coefficients(d, direction, c.a0, c.a1, c.l1_error);
  fold_degenerate_coords(samples->range, c.a0, c.a1);
  c.fit_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

namespace {

double native_residual(const CLA& c, const pflow::InjectionVector& inj,
                       double y_native) {
  return row_dot(inj, c.a0, c.a1) - y_native;
}

}  // namespace

CLA refine_with_selection(const CLA& cla, const net::Network& net,
                          const std::shared_ptr<const sampling::SampleSet>& extra,
                          std::size_t top_k, int max_rounds) {
  auto t0 = std::chrono::steady_clock::now();
  CLA cur = cla;
  cur.trained_on.extra = extra;
  std::size_t bus_index = net.index_of(cla.bus);

  std::vector<char> used(extra->size(), 0);
  for (std::uint32_t e : cla.trained_on.extra_used)
    if (e < used.size()) used[e] = 1;

  for (int round = 0; round < max_rounds; ++round) {
    std::vector<std::uint32_t> violators;
    std::vector<std::pair<double, std::uint32_t>> errors;
    for (std::size_t e = 0; e < extra->size(); ++e) {
      double y = output_of(extra->solutions[e], bus_index, cla.output_kind);
      double r = native_residual(cur, extra->injections[e], y);
      bool violated = cla.direction == Direction::over ? r < -1e-12 : r > 1e-12;
      if (violated && !used[e]) violators.push_back(static_cast<std::uint32_t>(e));
      if (!used[e]) errors.push_back({std::abs(r), static_cast<std::uint32_t>(e)});
    }
    bool any_violation = false;
    for (std::size_t e = 0; e < extra->size(); ++e) {
      double y = output_of(extra->solutions[e], bus_index, cla.output_kind);
      double r = native_residual(cur, extra->injections[e], y);
      if (cla.direction == Direction::over ? r < -1e-9 : r > 1e-9) {
        any_violation = true;
        break;
      }
    }
    if (!any_violation) break;

    // Largest errors first, sample index breaks ties.
    std::sort(errors.begin(), errors.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<std::uint32_t> add = violators;
    for (const auto& [err, idx] : errors) {
      if (add.size() >= violators.size() + top_k) break;
      if (std::find(add.begin(), add.end(), idx) == add.end()) add.push_back(idx);
    }
    if (add.empty()) break;
    for (std::uint32_t e : add) used[e] = 1;
    cur.trained_on.extra_used.insert(cur.trained_on.extra_used.end(), add.begin(),
                                     add.end());
    std::sort(cur.trained_on.extra_used.begin(), cur.trained_on.extra_used.end());

    FitData d = gather(cur.trained_on, net, cla.bus, cla.output_kind);
    fit_coefficients(d, cla.direction, cur.a0, cur.a1, cur.l1_error);
    fold_degenerate_coords(cur.trained_on.base->range, cur.a0, cur.a1);
    cur.selection_rounds = round + 1;
  }
  cur.fit_seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cur;
}

double evaluate_cla_raw(const CLA& cla, const pflow::InjectionVector& inj) {
  if (inj.p.size() * 2 != cla.a1.size())
    fail(ErrorCode::validation, "cla evaluation: injection dimension mismatch");
  return row_dot(inj, cla.a0, cla.a1);
}

double evaluate_cla(const CLA& cla, const pflow::InjectionVector& inj,
                    bool* clamped) {
  double z = evaluate_cla_raw(cla, inj);
  if (clamped) *clamped = false;
  if (cla.output_kind == OutputKind::V_squared) {
    if (z < 0.0) {
      if (clamped) *clamped = true;
      z = 0.0;
    }
    return std::sqrt(z);
  }
  return z;
}

CLABundle fit_bundle(const net::Network& net,
                     const std::shared_ptr<const sampling::SampleSet>& samples,
                     const std::shared_ptr<const sampling::SampleSet>& extra,
                     const FitOptions& opts) {
  CLABundle bundle;
  bundle.config = samples->config;
  bundle.output_kind = opts.output_kind;
  const auto& pq = net.pq_indices();
  bundle.over.resize(pq.size());
  bundle.under.resize(pq.size());

  parallel_for(
      pq.size() * 2,
      [&](std::size_t task) {
        std::size_t a = task / 2;
        Direction dir = task % 2 == 0 ? Direction::over : Direction::under;
        int bus = net.id_of(pq[a]);
        CLA c = fit_cla(samples, net, bus, dir, opts.output_kind);
        if (extra && extra->size() > 0)
          c = refine_with_selection(c, net, extra, opts.top_k, opts.max_rounds);
        (dir == Direction::over ? bundle.over[a] : bundle.under[a]) = std::move(c);
      },
      opts.jobs);
  return bundle;
}

double conservative_share(const CLA& cla, const net::Network& net,
                          const sampling::SampleSet& samples, double tol) {
  std::size_t bus_index = net.index_of(cla.bus);
  std::size_t good = 0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    double y = output_of(samples.solutions[s], bus_index, cla.output_kind);
    double r = native_residual(cla, samples.injections[s], y);
    bool ok = cla.direction == Direction::over ? r >= -tol : r <= tol;
    good += ok ? 1 : 0;
  }
  return static_cast<double>(good) / static_cast<double>(samples.size());
}

namespace {

json cla_to_json(const CLA& c) {
  return json{{"bus", c.bus},
              {"direction", c.direction == Direction::over ? "over" : "under"},
              {"output_kind", c.output_kind == OutputKind::V_squared ? "V_squared" : "V"},
              {"a0", c.a0},
              {"a1", c.a1},
              {"l1_error", c.l1_error},
              {"fit_seconds", c.fit_seconds},
              {"selection_rounds", c.selection_rounds},
              {"n_base", c.trained_on.base ? c.trained_on.base->size() : 0},
              {"n_extra_used", c.trained_on.extra_used.size()}};
}

CLA cla_from_json(const json& j) {
  CLA c;
  c.bus = j.at("bus").get<int>();
  c.direction = j.at("direction").get<std::string>() == "over" ? Direction::over
                                                               : Direction::under;
  c.output_kind = j.at("output_kind").get<std::string>() == "V"
                      ? OutputKind::V
                      : OutputKind::V_squared;
  c.a0 = j.at("a0").get<double>();
  c.a1 = j.at("a1").get<std::vector<double>>();
  c.l1_error = j.value("l1_error", 0.0);
  c.fit_seconds = j.value("fit_seconds", 0.0);
  c.selection_rounds = j.value("selection_rounds", 0);
  return c;
}

}  // namespace

std::string bundle_to_json(const CLABundle& bundle) {
  json over = json::array(), under = json::array();
  for (const CLA& c : bundle.over) over.push_back(cla_to_json(c));
  for (const CLA& c : bundle.under) under.push_back(cla_to_json(c));
  json doc{{"format", "voltsense-cla-bundle"},
           {"config", bundle.config},
           {"output_kind",
            bundle.output_kind == OutputKind::V_squared ? "V_squared" : "V"},
           {"selection_rule", "violators-plus-top-k-errors"},
           {"over", over},
           {"under", under}};
  return doc.dump(2) + "\n";
}

CLABundle bundle_from_json(const std::string& text, const net::Network& net) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("cla bundle: invalid JSON: ") + e.what());
  }
  if (doc.value("format", "") != "voltsense-cla-bundle")
    fail(ErrorCode::parse, "cla bundle: missing format tag");
  CLABundle b;
  b.config = doc.value("config", "");
  b.output_kind = doc.value("output_kind", "V_squared") == "V" ? OutputKind::V
                                                               : OutputKind::V_squared;
  for (const json& j : doc.at("over")) b.over.push_back(cla_from_json(j));
  for (const json& j : doc.at("under")) b.under.push_back(cla_from_json(j));
  if (b.over.size() != net.n_pq() || b.under.size() != net.n_pq())
    fail(ErrorCode::validation, "cla bundle does not cover every PQ bus");
  return b;
}

}  // namespace vsp::cla
