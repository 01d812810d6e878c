#include "voltsense/sampling.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

namespace vsp::sampling {

using nlohmann::json;

void InjectionRange::validate() const {
  if (p_max.size() != size() || q_min.size() != size() || q_max.size() != size())
    fail(ErrorCode::validation, "injection range arrays have mismatched lengths");
  for (std::size_t i = 0; i < size(); ++i)
    if (p_min[i] > p_max[i] || q_min[i] > q_max[i])
      fail(ErrorCode::validation,
           "injection range has min above max at position " + std::to_string(i));
}

InjectionRange range_from_fractions(
    const net::Network& net, double lo, double hi,
    const std::map<int, std::pair<double, double>>& p_overrides) {
  for (const auto& [bus_id, fr] : p_overrides) {
    std::size_t idx = net.index_of(bus_id);  // throws for unknown buses
    if (net.pq_position(idx) == net::Network::npos)
      fail(ErrorCode::validation,
           "range override targets non-PQ bus " + std::to_string(bus_id));
    if (fr.first > fr.second)
      fail(ErrorCode::validation,
           "range override at bus " + std::to_string(bus_id) + " has lo > hi");
  }
  if (lo > hi) fail(ErrorCode::validation, "range fractions have lo > hi");

  InjectionRange r;
  const auto& pq = net.pq_indices();
  r.p_min.resize(pq.size());
  r.p_max.resize(pq.size());
  r.q_min.resize(pq.size());
  r.q_max.resize(pq.size());
  for (std::size_t a = 0; a < pq.size(); ++a) {
    const net::Bus& b = net.buses()[pq[a]];
    double plo = lo, phi = hi;
    if (auto it = p_overrides.find(b.id); it != p_overrides.end()) {
      plo = it->second.first;
      phi = it->second.second;
    }
    double p1 = plo * b.p_nom, p2 = phi * b.p_nom;
    r.p_min[a] = std::min(p1, p2);
    r.p_max[a] = std::max(p1, p2);
    double q1 = lo * b.q_nom, q2 = hi * b.q_nom;
    r.q_min[a] = std::min(q1, q2);
    r.q_max[a] = std::max(q1, q2);
  }
  return r;
}

SampleSet draw_samples(const net::Network& net, const InjectionRange& range,
                       std::size_t n, std::uint64_t seed,
                       const DrawOptions& opts) {
  if (n < 1) fail(ErrorCode::validation, "sample count must be at least 1");
  range.validate();
  const std::size_t m = net.n_pq();
  if (range.size() != m)
    fail(ErrorCode::validation, "injection range does not match PQ bus count");

  SampleSet out;
  out.seed = seed;
  out.range = range;
  out.injections.resize(n);
  out.solutions.resize(n);

  CounterRng rng(seed);
  auto curves = pflow::curves_of(net);
  bool voltvar = opts.voltvar;

  parallel_for(
      n,
      [&](std::size_t s) {
        pflow::InjectionVector inj;
        inj.p.resize(m);
        inj.q.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
          inj.p[j] = rng.uniform(s * 2 * m + j, range.p_min[j], range.p_max[j]);
          inj.q[j] = rng.uniform(s * 2 * m + m + j, range.q_min[j], range.q_max[j]);
        }
        pflow::PFSolution sol =
            voltvar ? pflow::solve_pf_voltvar(net, inj, curves, opts.pf)
                    : pflow::solve_pf(net, inj, opts.pf);
        if (!sol.converged)
          fail(ErrorCode::numeric,
               "power flow did not converge for sample " + std::to_string(s));
        out.injections[s] = std::move(inj);
        out.solutions[s] = std::move(sol);
      },
      opts.jobs);
  return out;
}

namespace {

json range_to_json(const InjectionRange& r) {
  return json{{"p_min", r.p_min}, {"p_max", r.p_max},
              {"q_min", r.q_min}, {"q_max", r.q_max}};
}

InjectionRange range_from_json(const json& j) {
  InjectionRange r;
  r.p_min = j.at("p_min").get<std::vector<double>>();
  r.p_max = j.at("p_max").get<std::vector<double>>();
  r.q_min = j.at("q_min").get<std::vector<double>>();
  r.q_max = j.at("q_max").get<std::vector<double>>();
  r.validate();
  return r;
}

}  // namespace

void save_samples_csv(const SampleSet& s, const net::Network& net,
                      const std::string& csv_path,
                      const std::string& sidecar_path) {
  std::ostringstream csv;
  const auto& pq = net.pq_indices();
  for (std::size_t a = 0; a < pq.size(); ++a)
    csv << (a ? "," : "") << "p_" << net.id_of(pq[a]);
  for (std::size_t a = 0; a < pq.size(); ++a) csv << ",q_" << net.id_of(pq[a]);
  for (std::size_t i = 0; i < net.size(); ++i) csv << ",v_" << net.id_of(i);
  csv << "\n";
  for (std::size_t r = 0; r < s.size(); ++r) {
    const auto& inj = s.injections[r];
    const auto& sol = s.solutions[r];
    for (std::size_t a = 0; a < inj.p.size(); ++a)
      csv << (a ? "," : "") << format_double(inj.p[a]);
    for (double q : inj.q) csv << "," << format_double(q);
    for (double v : sol.v) csv << "," << format_double(v);
    csv << "\n";
  }
  write_file(csv_path, csv.str());

  json side{{"seed", s.seed},
            {"config", s.config},
            {"n_samples", s.size()},
            {"range", range_to_json(s.range)},
            {"distribution", "uniform"},
            {"generator", "splitmix64-counter"}};
  write_file(sidecar_path, side.dump(2) + "\n");
}

SampleSet load_samples_csv(const net::Network& net, const std::string& csv_path,
                           const std::string& sidecar_path) {
  json side = json::parse(read_file(sidecar_path));
  SampleSet out;
  out.seed = side.at("seed").get<std::uint64_t>();
  out.config = side.value("config", "");
  out.range = range_from_json(side.at("range"));

  std::istringstream in(read_file(csv_path));
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::parse, "samples csv is empty: " + csv_path);
  const std::size_t m = net.n_pq();
  const std::size_t want = 2 * m + net.size();
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    std::vector<double> vals;
    vals.reserve(want);
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      std::string tok = line.substr(
          start, comma == std::string::npos ? std::string::npos : comma - start);
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        fail(ErrorCode::parse, "samples csv: bad number at row " +
                                   std::to_string(row_no) + ": '" + tok + "'");
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (vals.size() != want)
      fail(ErrorCode::parse, "samples csv: row " + std::to_string(row_no) +
                                 " has " + std::to_string(vals.size()) +
                                 " fields, expected " + std::to_string(want));
    pflow::InjectionVector inj;
    inj.p.assign(vals.begin(), vals.begin() + m);
    inj.q.assign(vals.begin() + m, vals.begin() + 2 * m);
    pflow::PFSolution sol;
    sol.v.assign(vals.begin() + 2 * m, vals.end());
    sol.theta.assign(net.size(), 0.0);  // angles are not persisted
    sol.converged = true;
    out.injections.push_back(std::move(inj));
    out.solutions.push_back(std::move(sol));
  }
  return out;
}

}  // namespace vsp::sampling
