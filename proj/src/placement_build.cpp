#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "placement_internal.hpp"

namespace vsp::place {

using cla::CLA;
using detail::native;

namespace {

// One lower-level problem to certify: a target bus and a direction, folded
// into "minimize objective >= rhs" form (upper problems enter negated).
struct Problem {
  std::size_t cfg;
  std::size_t target;  // PQ position
  bool upper;
  double obj_a0;
  std::vector<double> obj_a1;
  double rhs;  // certification right-hand side in the folded orientation
};

struct BuildContext {
  const PlacementSpec& spec;
  cla::OutputKind kind;
  std::size_t b;  // PQ count
  std::vector<RiskSets> risk;        // per config
  std::vector<Problem> problems;
  bool upper_active = false;

  const net::Network& net(std::size_t c) const { return spec.configs[c].network; }
  const cla::CLABundle& bundle(std::size_t c) const { return spec.configs[c].bundle; }
};

// Sensor-row coefficient vector for bus j inside a given problem: the over
// approximation by default, the problem's own side when anchored.
const CLA& row_cla(const BuildContext& ctx, const Problem& p, std::size_t j,
                   OwnRowMode mode) {
  const auto& bundle = ctx.bundle(p.cfg);
  if (j == p.target && mode == OwnRowMode::anchored && !p.upper)
    return bundle.under[j];
  return bundle.over[j];
}

// Upper-band counterpart of row_cla (rows a <= translated upper threshold).
const CLA& row_cla_upper(const BuildContext& ctx, const Problem& p, std::size_t j,
                         OwnRowMode mode) {
  const auto& bundle = ctx.bundle(p.cfg);
  if (j == p.target && mode == OwnRowMode::anchored && p.upper)
    return bundle.over[j];
  return bundle.under[j];
}

BuildContext make_context(const PlacementSpec& spec) {
  spec.validate();
  BuildContext ctx{spec};
  ctx.kind = spec.configs.front().bundle.output_kind;
  ctx.b = spec.configs.front().network.n_pq();

  for (std::size_t c = 0; c < spec.configs.size(); ++c) {
    const ConfigCase& cc = spec.configs[c];
    ctx.risk.push_back(screen_risk(cc, 2.0 * spec.epsilon));
    if (!ctx.risk.back().upper.empty()) ctx.upper_active = true;

    // The no-sensor state treats a bus's band rows as vacuous; that needs the
    // approximations to stay positive over the box.
    for (std::size_t j = 0; j < ctx.b; ++j) {
      auto lo_over = detail::affine_range(cc.bundle.over[j].a1,
                                          cc.bundle.over[j].a0, spec.range);
      auto lo_under = detail::affine_range(cc.bundle.under[j].a1,
                                           cc.bundle.under[j].a0, spec.range);
      if (lo_over.first <= 0.0 || lo_under.first <= 0.0)
        fail(ErrorCode::numeric,
             "placement: approximation at bus " +
                 std::to_string(cc.network.id_of(cc.network.pq_indices()[j])) +
                 " can reach zero over the box; thresholds cannot be translated");
    }
  }

  for (std::size_t c = 0; c < spec.configs.size(); ++c) {
    const auto& bundle = ctx.bundle(c);
    const net::Network& n = ctx.net(c);
    for (std::size_t i : ctx.risk[c].lower) {
      Problem p;
      p.cfg = c;
      p.target = i;
      p.upper = false;
      p.obj_a0 = bundle.under[i].a0;
      p.obj_a1 = bundle.under[i].a1;
      p.rhs = native(ctx.kind, n.buses()[n.pq_indices()[i]].v_min);
      ctx.problems.push_back(std::move(p));
    }
    for (std::size_t i : ctx.risk[c].upper) {
      Problem p;  // folded: -max(over) >= -vmax^2
      p.cfg = c;
      p.target = i;
      p.upper = true;
      p.obj_a0 = -bundle.over[i].a0;
      p.obj_a1 = bundle.over[i].a1;
      for (double& v : p.obj_a1) v = -v;
      p.rhs = -native(ctx.kind, n.buses()[n.pq_indices()[i]].v_max);
      ctx.problems.push_back(std::move(p));
    }
  }
  return ctx;
}

std::string bus_name(const BuildContext& ctx, std::size_t c, std::size_t pq_pos) {
  const net::Network& n = ctx.net(c);
  return std::to_string(n.id_of(n.pq_indices()[pq_pos]));
}

// Shared upper-level block: sensor binaries plus translated lower thresholds
// (and upper ones when any bus risks its upper limit).
struct UpperLevel {
  std::vector<int> s;                        // by PQ position
  std::vector<std::vector<int>> u_lo;        // [cfg][pq]
  std::vector<std::vector<int>> u_up;        // [cfg][pq], empty if inactive
};

UpperLevel add_upper_level_continuous(lp::LinearModel& m, const BuildContext& ctx) {
  UpperLevel ul;
  const net::Network& net0 = ctx.net(0);
  for (std::size_t j = 0; j < ctx.b; ++j)
    ul.s.push_back(m.add_var("s_" + bus_name(ctx, 0, j), 0.0, 1.0,
                             lp::VarKind::binary, "sensor"));
  double m_nat = native(ctx.kind, ctx.spec.big_m);
  for (std::size_t c = 0; c < ctx.spec.configs.size(); ++c) {
    ul.u_lo.emplace_back();
    ul.u_up.emplace_back();
    for (std::size_t j = 0; j < ctx.b; ++j) {
      const net::Bus& bus = net0.buses()[net0.pq_indices()[j]];
      double lo_nat = native(ctx.kind, bus.v_min);
      double hi_nat = native(ctx.kind, bus.v_max);
      std::string tag = std::to_string(c + 1) + "_" + bus_name(ctx, c, j);
      int u = m.add_var("ulo_" + tag, 0.0, hi_nat, lp::VarKind::continuous,
                        "threshold");
      ul.u_lo[c].push_back(u);
      m.add_constraint("ulo_lb_" + tag, {{u, 1.0}, {ul.s[j], -lo_nat}},
                       lp::Relation::ge, 0.0, "threshold_translation");
      m.add_constraint("ulo_ub_" + tag, {{u, 1.0}, {ul.s[j], -hi_nat}},
                       lp::Relation::le, 0.0, "threshold_translation");
      if (ctx.upper_active) {
        int uu = m.add_var("uup_" + tag, 0.0, m_nat, lp::VarKind::continuous,
                           "threshold");
        ul.u_up[c].push_back(uu);
        // no sensor: pinned at the translation constant; sensor: within limits
        m.add_constraint("uup_ub_" + tag, {{uu, 1.0}, {ul.s[j], m_nat - hi_nat}},
                         lp::Relation::le, m_nat, "threshold_translation");
        m.add_constraint("uup_lb_" + tag, {{uu, 1.0}, {ul.s[j], m_nat - lo_nat}},
                         lp::Relation::ge, 0.0, "threshold_translation");
      }
    }
  }
  return ul;
}

void set_continuous_cost(lp::LinearModel& m, const BuildContext& ctx,
                         const UpperLevel& ul) {
  const net::Network& net0 = ctx.net(0);
  const double share = 1.0 / static_cast<double>(ctx.spec.configs.size());
  std::vector<lp::Term> obj;
  double constant = 0.0;
  for (std::size_t j = 0; j < ctx.b; ++j) {
    const net::Bus& bus = net0.buses()[net0.pq_indices()[j]];
    double s_coeff = ctx.spec.delta;
    for (std::size_t c = 0; c < ctx.spec.configs.size(); ++c) {
      // restrictiveness in volts, first order at the limit
      double w_lo = ctx.kind == cla::OutputKind::V_squared ? 1.0 / (2.0 * bus.v_min)
                                                           : 1.0;
      obj.push_back({ul.u_lo[c][j], share * w_lo});
      s_coeff -= share * w_lo * native(ctx.kind, bus.v_min);
      if (ctx.upper_active) {
        double w_up = ctx.kind == cla::OutputKind::V_squared
                          ? 1.0 / (2.0 * bus.v_max)
                          : 1.0;
        double m_nat = native(ctx.kind, ctx.spec.big_m);
        obj.push_back({ul.u_up[c][j], -share * w_up});
        s_coeff += share * w_up * (native(ctx.kind, bus.v_max) - m_nat);
        constant += share * w_up * m_nat;
      }
    }
    obj.push_back({ul.s[j], s_coeff});
  }
  m.set_objective(lp::Sense::minimize, std::move(obj), constant);
}

// Duals of one folded problem in the reduced form: row multipliers lambda
// (one per bus band row) and |bound-dual| caps tau, with the bound dual g
// substituted out through stationarity.
struct ReducedDual {
  std::vector<int> lam_lo;  // per PQ bus
  std::vector<int> lam_up;  // per PQ bus (only when upper machinery is active)
  std::vector<int> tau;     // per box coordinate
};

ReducedDual add_reduced_dual(lp::LinearModel& m, const BuildContext& ctx,
                             const Problem& p, OwnRowMode own_mode,
                             std::size_t index) {
  ReducedDual rd;
  const std::size_t xdim = 2 * ctx.b;
  std::string tag = "p" + std::to_string(index);
  for (std::size_t j = 0; j < ctx.b; ++j)
    rd.lam_lo.push_back(m.add_var(tag + "_lam_" + bus_name(ctx, p.cfg, j), 0.0,
                                  ctx.spec.dual_bound, lp::VarKind::continuous,
                                  "dual"));
  if (ctx.upper_active)
    for (std::size_t j = 0; j < ctx.b; ++j)
      rd.lam_up.push_back(m.add_var(tag + "_mu_" + bus_name(ctx, p.cfg, j), 0.0,
                                    ctx.spec.dual_bound, lp::VarKind::continuous,
                                    "dual"));
  for (std::size_t t = 0; t < xdim; ++t)
    rd.tau.push_back(m.add_var(tag + "_tau_" + std::to_string(t), 0.0, lp::kInf,
                               lp::VarKind::continuous, "dual"));

  // tau_t >= |g_t| with g = obj_a1 - sum_j lam_j row_j (+ sum_j mu_j under_j).
  const auto& bundle = ctx.bundle(p.cfg);
  bool own_excluded = own_mode == OwnRowMode::excluded;
  for (std::size_t t = 0; t < xdim; ++t) {
    std::vector<lp::Term> plus{{rd.tau[t], 1.0}};
    std::vector<lp::Term> minus{{rd.tau[t], 1.0}};
    for (std::size_t j = 0; j < ctx.b; ++j) {
      if (own_excluded && j == p.target) continue;
      double r = row_cla(ctx, p, j, own_mode).a1[t];
      if (r != 0.0) {
        plus.push_back({rd.lam_lo[j], r});
        minus.push_back({rd.lam_lo[j], -r});
      }
      if (ctx.upper_active) {
        double ru = row_cla_upper(ctx, p, j, own_mode).a1[t];
        if (ru != 0.0) {
          plus.push_back({rd.lam_up[j], -ru});
          minus.push_back({rd.lam_up[j], ru});
        }
      }
    }
    m.add_constraint(tag + "_absp_" + std::to_string(t), std::move(plus),
                     lp::Relation::ge, p.obj_a1[t], "dual_bound_abs");
    m.add_constraint(tag + "_absm_" + std::to_string(t), std::move(minus),
                     lp::Relation::ge, -p.obj_a1[t], "dual_bound_abs");
  }
  return rd;
}

// Certification row pieces that are independent of how the thresholds enter.
struct CertRow {
  std::vector<lp::Term> terms;
  double rhs;
};

CertRow cert_row_base(const BuildContext& ctx, const Problem& p,
                      const ReducedDual& rd, OwnRowMode own_mode) {
  const std::size_t m = ctx.b;
  const auto& bundle = ctx.bundle(p.cfg);
  const auto& range = ctx.spec.range;
  CertRow row;
  double const_part = p.obj_a0;
  for (std::size_t t = 0; t < 2 * m; ++t) {
    double c = t < m ? 0.5 * (range.p_min[t] + range.p_max[t])
                     : 0.5 * (range.q_min[t - m] + range.q_max[t - m]);
    double h = t < m ? 0.5 * (range.p_max[t] - range.p_min[t])
                     : 0.5 * (range.q_max[t - m] - range.q_min[t - m]);
    const_part += p.obj_a1[t] * c;
    if (h != 0.0) row.terms.push_back({rd.tau[t], -h});
    for (std::size_t j = 0; j < m; ++j) {
      if (own_mode == OwnRowMode::excluded && j == p.target) continue;
      double r = row_cla(ctx, p, j, own_mode).a1[t];
      if (r != 0.0) row.terms.push_back({rd.lam_lo[j], -r * c});
      if (ctx.upper_active) {
        double ru = row_cla_upper(ctx, p, j, own_mode).a1[t];
        if (ru != 0.0) row.terms.push_back({rd.lam_up[j], ru * c});
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (own_mode == OwnRowMode::excluded && j == p.target) continue;
    row.terms.push_back({rd.lam_lo[j], -row_cla(ctx, p, j, own_mode).a0});
    if (ctx.upper_active)
      row.terms.push_back({rd.lam_up[j], row_cla_upper(ctx, p, j, own_mode).a0});
  }
  row.rhs = p.rhs - const_part;
  return row;
}

void merge_terms(std::vector<lp::Term>& terms) {
  std::sort(terms.begin(), terms.end(),
            [](const lp::Term& a, const lp::Term& b) { return a.var < b.var; });
  std::size_t w = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (w > 0 && terms[w - 1].var == terms[i].var)
      terms[w - 1].coeff += terms[i].coeff;
    else
      terms[w++] = terms[i];
  }
  terms.resize(w);
}

}  // namespace

lp::LinearModel build_bilinear(const PlacementSpec& spec) {
  BuildContext ctx = make_context(spec);
  lp::LinearModel m;
  m.set_name("placement_bilinear");
  UpperLevel ul = add_upper_level_continuous(m, ctx);
  set_continuous_cost(m, ctx, ul);

  for (std::size_t pi = 0; pi < ctx.problems.size(); ++pi) {
    const Problem& p = ctx.problems[pi];
    OwnRowMode mode =
        spec.exclude_own_bus ? OwnRowMode::excluded : OwnRowMode::weak;
    ReducedDual rd = add_reduced_dual(m, ctx, p, mode, pi);
    CertRow row = cert_row_base(ctx, p, rd, mode);
    std::vector<lp::BilinearTerm> bil;
    for (std::size_t j = 0; j < ctx.b; ++j) {
      if (mode == OwnRowMode::excluded && j == p.target) continue;
      bil.push_back({rd.lam_lo[j], ul.u_lo[p.cfg][j], 1.0});
      if (ctx.upper_active) bil.push_back({rd.lam_up[j], ul.u_up[p.cfg][j], -1.0});
    }
    merge_terms(row.terms);
    m.add_bilinear_constraint("cert_p" + std::to_string(pi), std::move(row.terms),
                              std::move(bil), lp::Relation::ge, row.rhs,
                              "certification");
  }
  return m;
}

lp::LinearModel build_milp(const PlacementSpec& spec) {
  BuildContext ctx = make_context(spec);
  lp::LinearModel m;
  m.set_name("placement_milp");
  const net::Network& net0 = ctx.net(0);

  // Sensor binaries and per-configuration threshold selectors.
  std::vector<int> s;
  for (std::size_t j = 0; j < ctx.b; ++j)
    s.push_back(m.add_var("s_" + bus_name(ctx, 0, j), 0.0, 1.0,
                          lp::VarKind::binary, "sensor"));

  struct Slots {
    detail::GridSlots grid;
    std::vector<int> eta;
    int u = -1;  // translated threshold variable
  };
  std::vector<std::vector<Slots>> lo(spec.configs.size());
  std::vector<std::vector<Slots>> up(spec.configs.size());

  std::vector<lp::Term> obj;
  const double share = 1.0 / static_cast<double>(spec.configs.size());
  for (std::size_t j = 0; j < ctx.b; ++j) obj.push_back({s[j], spec.delta});

  for (std::size_t c = 0; c < spec.configs.size(); ++c) {
    for (std::size_t j = 0; j < ctx.b; ++j) {
      const net::Bus& bus = net0.buses()[net0.pq_indices()[j]];
      std::string tag = std::to_string(c + 1) + "_" + bus_name(ctx, c, j);
      bool collapse =
          spec.bvr && detail::min_sampled_v(spec.configs[c], ctx.net(c).pq_indices()[j]) >
                          bus.v_min + (spec.d_steps - 1) * spec.epsilon;
      Slots sl;
      sl.grid = detail::lower_grid(bus.v_min, spec.epsilon, spec.d_steps, collapse);
      std::vector<lp::Term> sum;
      std::vector<lp::Term> udef;
      sl.u = m.add_var("ulo_" + tag, 0.0, native(ctx.kind, bus.v_max),
                       lp::VarKind::continuous, "threshold");
      udef.push_back({sl.u, -1.0});
      for (std::size_t k = 0; k < sl.grid.count(); ++k) {
        int e = m.add_var("eta_" + tag + "_" + std::to_string(k), 0.0, 1.0,
                          lp::VarKind::binary, "selector");
        sl.eta.push_back(e);
        sum.push_back({e, 1.0});
        if (k > 0) {
          udef.push_back({e, native(ctx.kind, sl.grid.volts[k])});
          obj.push_back({e, share * (sl.grid.volts[k] - bus.v_min)});
        }
      }
      m.add_constraint("one_" + tag, std::move(sum), lp::Relation::eq, 1.0,
                       "selector_sum");
      m.add_constraint("link_" + tag, {{s[j], 1.0}, {sl.eta[0], 1.0}},
                       lp::Relation::eq, 1.0, "selector_link");
      m.add_constraint("udef_" + tag, std::move(udef), lp::Relation::eq, 0.0,
                       "threshold_translation");
      lo[c].push_back(std::move(sl));

      if (ctx.upper_active) {
        bool collapse_up =
            spec.bvr &&
            detail::max_sampled_v(spec.configs[c], ctx.net(c).pq_indices()[j]) <
                bus.v_max - (spec.d_steps - 1) * spec.epsilon;
        Slots su;
        su.grid =
            detail::upper_grid(bus.v_max, spec.epsilon, spec.d_steps, collapse_up);
        double m_nat = native(ctx.kind, spec.big_m);
        std::vector<lp::Term> sum_u, udef_u;
        su.u = m.add_var("uup_" + tag, 0.0, m_nat, lp::VarKind::continuous,
                         "threshold");
        udef_u.push_back({su.u, -1.0});
        for (std::size_t k = 0; k < su.grid.count(); ++k) {
          int e = m.add_var("zeta_" + tag + "_" + std::to_string(k), 0.0, 1.0,
                            lp::VarKind::binary, "selector");
          su.eta.push_back(e);
          sum_u.push_back({e, 1.0});
          udef_u.push_back(
              {e, k == 0 ? m_nat : native(ctx.kind, su.grid.volts[k])});
          if (k > 0) obj.push_back({e, share * (bus.v_max - su.grid.volts[k])});
        }
        m.add_constraint("oneu_" + tag, std::move(sum_u), lp::Relation::eq, 1.0,
                         "selector_sum");
        m.add_constraint("linku_" + tag, {{s[j], 1.0}, {su.eta[0], 1.0}},
                         lp::Relation::eq, 1.0, "selector_link");
        m.add_constraint("udefu_" + tag, std::move(udef_u), lp::Relation::eq, 0.0,
                         "threshold_translation");
        up[c].push_back(std::move(su));
      }
    }
  }
  m.set_objective(lp::Sense::minimize, std::move(obj), 0.0);

  for (std::size_t pi = 0; pi < ctx.problems.size(); ++pi) {
    const Problem& p = ctx.problems[pi];
    OwnRowMode mode =
        spec.exclude_own_bus ? OwnRowMode::excluded : OwnRowMode::anchored;
    ReducedDual rd = add_reduced_dual(m, ctx, p, mode, pi);
    CertRow row = cert_row_base(ctx, p, rd, mode);
    // lambda * threshold via exact products with the slot selectors
    for (std::size_t j = 0; j < ctx.b; ++j) {
      if (mode == OwnRowMode::excluded && j == p.target) continue;
      const Slots& sl = lo[p.cfg][j];
      for (std::size_t k = 1; k < sl.grid.count(); ++k) {
        int w = lp::add_binary_product(
            m, "w_p" + std::to_string(pi) + "_" + bus_name(ctx, p.cfg, j) + "_" +
                   std::to_string(k),
            rd.lam_lo[j], sl.eta[k]);
        row.terms.push_back({w, native(ctx.kind, sl.grid.volts[k])});
      }
      if (ctx.upper_active) {
        const Slots& su = up[p.cfg][j];
        double m_nat = native(ctx.kind, spec.big_m);
        for (std::size_t k = 0; k < su.grid.count(); ++k) {
          int w = lp::add_binary_product(
              m, "wu_p" + std::to_string(pi) + "_" + bus_name(ctx, p.cfg, j) +
                     "_" + std::to_string(k),
              rd.lam_up[j], su.eta[k]);
          row.terms.push_back(
              {w, -(k == 0 ? m_nat : native(ctx.kind, su.grid.volts[k]))});
        }
      }
    }
    merge_terms(row.terms);
    m.add_constraint("cert_p" + std::to_string(pi), std::move(row.terms),
                     lp::Relation::ge, row.rhs, "certification");
  }
  return m;
}

lp::LinearModel build_kkt(const PlacementSpec& spec) {
  BuildContext ctx = make_context(spec);
  lp::LinearModel m;
  m.set_name("placement_kkt");
  UpperLevel ul = add_upper_level_continuous(m, ctx);
  set_continuous_cost(m, ctx, ul);

  const auto& range = spec.range;
  const std::size_t xdim = 2 * ctx.b;
  const double m_compl = 10.0;  // slack-side constant of the complementarity pairs
  const double m_cert = native(ctx.kind, spec.big_m);

  for (std::size_t pi = 0; pi < ctx.problems.size(); ++pi) {
    const Problem& p = ctx.problems[pi];
    std::string tag = "p" + std::to_string(pi);
    OwnRowMode mode =
        spec.exclude_own_bus ? OwnRowMode::excluded : OwnRowMode::weak;

    std::vector<int> x;
    for (std::size_t t = 0; t < xdim; ++t) {
      double lo_b = t < ctx.b ? range.p_min[t] : range.q_min[t - ctx.b];
      double hi_b = t < ctx.b ? range.p_max[t] : range.q_max[t - ctx.b];
      x.push_back(m.add_var(tag + "_x" + std::to_string(t), lo_b, hi_b,
                            lp::VarKind::continuous, "injection"));
    }
    std::vector<int> lam(ctx.b, -1), mu(ctx.b, -1);
    for (std::size_t j = 0; j < ctx.b; ++j) {
      if (mode == OwnRowMode::excluded && j == p.target) continue;
      lam[j] = m.add_var(tag + "_lam_" + bus_name(ctx, p.cfg, j), 0.0,
                         spec.dual_bound, lp::VarKind::continuous, "dual");
      if (ctx.upper_active)
        mu[j] = m.add_var(tag + "_mu_" + bus_name(ctx, p.cfg, j), 0.0,
                          spec.dual_bound, lp::VarKind::continuous, "dual");
    }
    std::vector<int> g;
    for (std::size_t t = 0; t < xdim; ++t)
      g.push_back(m.add_var(tag + "_g" + std::to_string(t), -lp::kInf, lp::kInf,
                            lp::VarKind::continuous, "dual"));

    // Stationarity: g + sum_j lam_j row_j (- sum_j mu_j under_j) = obj_a1.
    for (std::size_t t = 0; t < xdim; ++t) {
      std::vector<lp::Term> terms{{g[t], 1.0}};
      for (std::size_t j = 0; j < ctx.b; ++j) {
        if (lam[j] < 0) continue;
        double r = row_cla(ctx, p, j, mode).a1[t];
        if (r != 0.0) terms.push_back({lam[j], r});
        if (mu[j] >= 0) {
          double ru = ctx.bundle(p.cfg).under[j].a1[t];
          if (ru != 0.0) terms.push_back({mu[j], -ru});
        }
      }
      m.add_constraint(tag + "_stat" + std::to_string(t), std::move(terms),
                       lp::Relation::eq, p.obj_a1[t], "stationarity");
    }

    // Primal band rows, their complementarity, and the box complementarity.
    for (std::size_t j = 0; j < ctx.b; ++j) {
      if (lam[j] < 0) continue;
      const CLA& rc = row_cla(ctx, p, j, mode);
      std::vector<lp::Term> prim;
      for (std::size_t t = 0; t < xdim; ++t)
        if (rc.a1[t] != 0.0) prim.push_back({x[t], rc.a1[t]});
      prim.push_back({ul.u_lo[p.cfg][j], -1.0});
      m.add_constraint(tag + "_band_" + bus_name(ctx, p.cfg, j), std::move(prim),
                       lp::Relation::ge, -rc.a0, "primal_sensor");

      int z = m.add_var(tag + "_zs_" + bus_name(ctx, p.cfg, j), 0.0, 1.0,
                        lp::VarKind::binary, "complementarity");
      m.add_constraint(tag + "_cl1_" + bus_name(ctx, p.cfg, j),
                       {{lam[j], 1.0}, {z, -spec.dual_bound}}, lp::Relation::le,
                       0.0, "complementarity");
      std::vector<lp::Term> slack;
      for (std::size_t t = 0; t < xdim; ++t)
        if (rc.a1[t] != 0.0) slack.push_back({x[t], rc.a1[t]});
      slack.push_back({ul.u_lo[p.cfg][j], -1.0});
      slack.push_back({z, m_compl});
      m.add_constraint(tag + "_cl2_" + bus_name(ctx, p.cfg, j), std::move(slack),
                       lp::Relation::le, m_compl - rc.a0, "complementarity");

      if (mu[j] >= 0) {
        const CLA& uc = ctx.bundle(p.cfg).under[j];
        std::vector<lp::Term> prim_u;
        for (std::size_t t = 0; t < xdim; ++t)
          if (uc.a1[t] != 0.0) prim_u.push_back({x[t], uc.a1[t]});
        prim_u.push_back({ul.u_up[p.cfg][j], -1.0});
        m.add_constraint(tag + "_bandu_" + bus_name(ctx, p.cfg, j),
                         std::move(prim_u), lp::Relation::le, -uc.a0,
                         "primal_sensor");
        int zu = m.add_var(tag + "_zu_" + bus_name(ctx, p.cfg, j), 0.0, 1.0,
                           lp::VarKind::binary, "complementarity");
        m.add_constraint(tag + "_cl3_" + bus_name(ctx, p.cfg, j),
                         {{mu[j], 1.0}, {zu, -spec.dual_bound}}, lp::Relation::le,
                         0.0, "complementarity");
        std::vector<lp::Term> slack_u{{ul.u_up[p.cfg][j], 1.0}, {zu, m_compl}};
        for (std::size_t t = 0; t < xdim; ++t)
          if (uc.a1[t] != 0.0) slack_u.push_back({x[t], -uc.a1[t]});
        m.add_constraint(tag + "_cl4_" + bus_name(ctx, p.cfg, j),
                         std::move(slack_u), lp::Relation::le, m_compl + uc.a0,
                         "complementarity");
      }
    }
    for (std::size_t t = 0; t < xdim; ++t) {
      double lo_b = t < ctx.b ? range.p_min[t] : range.q_min[t - ctx.b];
      double hi_b = t < ctx.b ? range.p_max[t] : range.q_max[t - ctx.b];
      double width = hi_b - lo_b;
      int zlo = m.add_var(tag + "_zlo" + std::to_string(t), 0.0, 1.0,
                          lp::VarKind::binary, "complementarity");
      int zup = m.add_var(tag + "_zup" + std::to_string(t), 0.0, 1.0,
                          lp::VarKind::binary, "complementarity");
      m.add_constraint(tag + "_gp" + std::to_string(t),
                       {{g[t], 1.0}, {zlo, -spec.dual_bound}}, lp::Relation::le,
                       0.0, "complementarity");
      m.add_constraint(tag + "_gm" + std::to_string(t),
                       {{g[t], -1.0}, {zup, -spec.dual_bound}}, lp::Relation::le,
                       0.0, "complementarity");
      m.add_constraint(tag + "_xl" + std::to_string(t),
                       {{x[t], 1.0}, {zlo, width}}, lp::Relation::le,
                       lo_b + width, "complementarity");
      m.add_constraint(tag + "_xu" + std::to_string(t),
                       {{x[t], -1.0}, {zup, width}}, lp::Relation::le,
                       -hi_b + width, "complementarity");
      m.add_constraint(tag + "_zz" + std::to_string(t),
                       {{zlo, 1.0}, {zup, 1.0}}, lp::Relation::le, 1.0,
                       "complementarity");
    }

    // Certification, disabled at the target when its own sensor is placed.
    std::vector<lp::Term> cert;
    for (std::size_t t = 0; t < xdim; ++t)
      if (p.obj_a1[t] != 0.0) cert.push_back({x[t], p.obj_a1[t]});
    cert.push_back({ul.s[p.target], m_cert});
    m.add_constraint(tag + "_cert", std::move(cert), lp::Relation::ge,
                     p.rhs - p.obj_a0, "certification");
  }
  return m;
}

ModelStats model_stats(const lp::LinearModel& model) {
  ModelStats st;
  for (const auto& v : model.vars()) {
    std::string cat = v.category.empty() ? "other" : v.category;
    ++st.variables[cat];
  }
  for (const auto& c : model.constraints()) {
    std::string cat = c.category.empty() ? "other" : c.category;
    ++st.constraints[cat];
  }
  auto count = [](const std::map<std::string, std::size_t>& m, const char* k) {
    auto it = m.find(k);
    return it == m.end() ? std::size_t{0} : it->second;
  };
  st.n_buses = count(st.variables, "sensor");
  st.n_risk_problems = count(st.constraints, "certification");
  st.decision_variables = count(st.variables, "injection") +
                          count(st.variables, "dual") +
                          count(st.variables, "threshold") +
                          count(st.variables, "sensor");
  st.removed_constraints = count(st.constraints, "stationarity") +
                           count(st.constraints, "primal_sensor") +
                           count(st.variables, "injection");
  return st;
}

std::string ModelStats::to_json() const {
  nlohmann::json doc{{"variables", variables},
                     {"constraints", constraints},
                     {"n_buses", n_buses},
                     {"n_risk_problems", n_risk_problems},
                     {"decision_variables", decision_variables},
                     {"removed_constraints", removed_constraints}};
  return doc.dump(2) + "\n";
}

}  // namespace vsp::place
