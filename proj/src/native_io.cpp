#include "voltsense/native_io.hpp"

#include <map>

#include <nlohmann/json.hpp>

namespace vsp::net {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(ErrorCode::parse, "native case: " + path + ": " + what);
}

const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) bad(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(path + "." + key, "missing field");
  return *it;
}

double num(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

double num_field(const json& j, const std::string& path, const char* key) {
  return num(field(j, path, key), path + "." + key);
}

double num_or(const json& j, const std::string& path, const char* key,
              double fallback) {
  if (!j.is_object()) bad(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return num(*it, path + "." + key);
}

std::string str_field(const json& j, const std::string& path, const char* key) {
  const json& v = field(j, path, key);
  if (!v.is_string()) bad(path + "." + key, "expected a string");
  return v.get<std::string>();
}

LineStatus status_from(const std::string& s, const std::string& path) {
  if (s == "closed") return LineStatus::closed;
  if (s == "open") return LineStatus::open;
  bad(path, "expected \"closed\" or \"open\", got \"" + s + "\"");
}

std::vector<double> num_array(const json& j, const std::string& path,
                              std::size_t want) {
  if (!j.is_array()) bad(path, "expected an array");
  if (j.size() != want)
    bad(path, "expected " + std::to_string(want) + " entries, got " +
                  std::to_string(j.size()));
  std::vector<double> out;
  out.reserve(want);
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(num(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

pflow::VoltVarCurve voltvar_from(const json& j, const std::string& path) {
  pflow::VoltVarCurve c;
  const json& bp = field(j, path, "breakpoints");
  if (!bp.is_array() || bp.size() != 5)
    bad(path + ".breakpoints", "expected exactly 5 [voltage, fraction] pairs");
  for (std::size_t k = 0; k < 5; ++k) {
    const json& pair = bp[k];
    std::string p = path + ".breakpoints[" + std::to_string(k) + "]";
    if (!pair.is_array() || pair.size() != 2) bad(p, "expected a 2-element array");
    c.breakpoints[k] = {num(pair[0], p + "[0]"), num(pair[1], p + "[1]")};
  }
  c.q_capacity = num_field(j, path, "q_capacity");
  if (!c.valid()) bad(path, "breakpoint voltages must increase and fractions lie in [-1, 1]");
  return c;
}

}  // namespace

NativeCase load_native(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("native case: invalid JSON: ") + e.what());
  }

  const json& jnet = field(doc, "$", "network");
  double base_mva = num_field(jnet, "network", "base_mva");

  const json& jbuses = field(jnet, "network", "buses");
  if (!jbuses.is_array() || jbuses.empty())
    bad("network.buses", "expected a non-empty array");
  std::vector<Bus> buses;
  for (std::size_t i = 0; i < jbuses.size(); ++i) {
    std::string path = "network.buses[" + std::to_string(i) + "]";
    const json& jb = jbuses[i];
    Bus b;
    b.id = static_cast<int>(num_field(jb, path, "id"));
    std::string kind = str_field(jb, path, "kind");
    if (kind == "slack")
      b.kind = BusKind::slack;
    else if (kind == "pq")
      b.kind = BusKind::pq;
    else
      bad(path + ".kind", "expected \"slack\" or \"pq\", got \"" + kind + "\"");
    b.v_min = num_or(jb, path, "v_min", b.v_min);
    b.v_max = num_or(jb, path, "v_max", b.v_max);
    b.p_nom = num_or(jb, path, "p_nom", 0.0);
    b.q_nom = num_or(jb, path, "q_nom", 0.0);
    if (jb.contains("voltvar"))
      b.voltvar = voltvar_from(jb["voltvar"], path + ".voltvar");
    buses.push_back(b);
  }

  const json& jlines = field(jnet, "network", "lines");
  if (!jlines.is_array()) bad("network.lines", "expected an array");
  std::vector<Line> lines;
  for (std::size_t i = 0; i < jlines.size(); ++i) {
    std::string path = "network.lines[" + std::to_string(i) + "]";
    const json& jl = jlines[i];
    Line ln;
    ln.from = static_cast<int>(num_field(jl, path, "from"));
    ln.to = static_cast<int>(num_field(jl, path, "to"));
    ln.r = num_field(jl, path, "r");
    ln.x = num_field(jl, path, "x");
    ln.b_sh = num_or(jl, path, "b_sh", 0.0);
    ln.status = jl.contains("status")
                    ? status_from(str_field(jl, path, "status"), path + ".status")
                    : LineStatus::closed;
    lines.push_back(ln);
  }

  if (doc.contains("limits")) {
    const json& jl = doc["limits"];
    auto apply = [&](const char* key, double Bus::* member) {
      if (!jl.contains(key)) return;
      const json& v = jl[key];
      std::string path = std::string("limits.") + key;
      if (v.is_number()) {
        for (Bus& b : buses) b.*member = v.get<double>();
      } else if (v.is_array()) {
        auto arr = num_array(v, path, buses.size());
        for (std::size_t i = 0; i < buses.size(); ++i) buses[i].*member = arr[i];
      } else {
        bad(path, "expected a number or a per-bus array");
      }
    };
    apply("v_min", &Bus::v_min);
    apply("v_max", &Bus::v_max);
  }

  NativeCase out;
  try {
    out.network = Network(std::move(buses), std::move(lines), base_mva);
  } catch (const Error& e) {
    fail(e.code(), std::string("native case: network: ") + e.what());
  }

  if (doc.contains("configurations") && !doc["configurations"].empty()) {
    const json& jcfgs = doc["configurations"];
    if (!jcfgs.is_array()) bad("configurations", "expected an array");
    for (std::size_t i = 0; i < jcfgs.size(); ++i) {
      std::string path = "configurations[" + std::to_string(i) + "]";
      const json& jc = jcfgs[i];
      Configuration cfg;
      cfg.name = str_field(jc, path, "name");
      const json& jov = field(jc, path, "line_status_overrides");
      if (!jov.is_array()) bad(path + ".line_status_overrides", "expected an array");
      for (std::size_t k = 0; k < jov.size(); ++k) {
        std::string p = path + ".line_status_overrides[" + std::to_string(k) + "]";
        int line1 = static_cast<int>(num_field(jov[k], p, "line"));
        if (line1 < 1 || static_cast<std::size_t>(line1) > out.network.lines().size())
          bad(p + ".line", "1-based line index out of range");
        cfg.line_status_overrides.push_back(
            {static_cast<std::size_t>(line1 - 1),
             status_from(str_field(jov[k], p, "status"), p + ".status")});
      }
      out.configurations.push_back(std::move(cfg));
    }
  } else {
    out.configurations.push_back(Configuration{"nominal", {}});
  }
  for (const auto& cfg : out.configurations)
    (void)apply_configuration(out.network, cfg);  // rejects disconnections by name

  const std::size_t m = out.network.n_pq();
  if (doc.contains("injection_range")) {
    const json& jr = doc["injection_range"];
    if (jr.contains("fractions")) {
      const json& jf = jr["fractions"];
      std::map<int, std::pair<double, double>> overrides;
      if (jf.contains("p_overrides")) {
        for (const auto& [key, val] : jf["p_overrides"].items()) {
          std::string p = "injection_range.fractions.p_overrides." + key;
          auto pair = num_array(val, p, 2);
          overrides[std::stoi(key)] = {pair[0], pair[1]};
        }
      }
      out.range = sampling::range_from_fractions(
          out.network, num_field(jf, "injection_range.fractions", "lo"),
          num_field(jf, "injection_range.fractions", "hi"), overrides);
    } else {
      out.range.p_min = num_array(field(jr, "injection_range", "p_min"),
                                  "injection_range.p_min", m);
      out.range.p_max = num_array(field(jr, "injection_range", "p_max"),
                                  "injection_range.p_max", m);
      out.range.q_min = num_array(field(jr, "injection_range", "q_min"),
                                  "injection_range.q_min", m);
      out.range.q_max = num_array(field(jr, "injection_range", "q_max"),
                                  "injection_range.q_max", m);
      out.range.validate();
    }
  } else {
    out.range = sampling::range_from_fractions(out.network, 1.0, 1.0);
  }
  return out;
}

std::string serialize_native(const Network& net,
                             const std::vector<Configuration>& configurations,
                             const sampling::InjectionRange& range) {
  json jbuses = json::array();
  for (const Bus& b : net.buses()) {
    json jb{{"id", b.id},
            {"kind", b.kind == BusKind::slack ? "slack" : "pq"},
            {"v_min", b.v_min},
            {"v_max", b.v_max},
            {"p_nom", b.p_nom},
            {"q_nom", b.q_nom}};
    if (b.voltvar) {
      json bp = json::array();
      for (const auto& [v, f] : b.voltvar->breakpoints)
        bp.push_back(json::array({v, f}));
      jb["voltvar"] = {{"breakpoints", bp}, {"q_capacity", b.voltvar->q_capacity}};
    }
    jbuses.push_back(std::move(jb));
  }
  json jlines = json::array();
  for (const Line& ln : net.lines()) {
    jlines.push_back(json{{"from", ln.from},
                          {"to", ln.to},
                          {"r", ln.r},
                          {"x", ln.x},
                          {"b_sh", ln.b_sh},
                          {"status", ln.status == LineStatus::closed ? "closed"
                                                                     : "open"}});
  }
  json jcfgs = json::array();
  for (const Configuration& cfg : configurations) {
    json jov = json::array();
    for (const auto& ovr : cfg.line_status_overrides)
      jov.push_back(json{{"line", ovr.line + 1},
                         {"status", ovr.status == LineStatus::closed ? "closed"
                                                                     : "open"}});
    jcfgs.push_back(json{{"name", cfg.name}, {"line_status_overrides", jov}});
  }
  json doc{{"network",
            {{"base_mva", net.base_mva()}, {"buses", jbuses}, {"lines", jlines}}},
           {"configurations", jcfgs},
           {"injection_range",
            {{"p_min", range.p_min},
             {"p_max", range.p_max},
             {"q_min", range.q_min},
             {"q_max", range.q_max}}}};
  return doc.dump(2) + "\n";
}

}  // namespace vsp::net
