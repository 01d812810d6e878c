#include "voltsense/lpcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace vsp::lp {

using nlohmann::json;

int LinearModel::add_var(std::string name, double lower, double upper,
                         VarKind kind, std::string category) {
  Variable v;
  v.name = std::move(name);
  v.lower = lower;
  v.upper = upper;
  v.kind = kind;
  v.category = std::move(category);
  if (kind == VarKind::binary) {
    v.lower = std::max(0.0, lower);
    v.upper = std::min(1.0, upper);
  }
  if (v.lower > v.upper)
    fail(ErrorCode::validation, "variable " + v.name + ": lower bound above upper");
  vars_.push_back(std::move(v));
  return static_cast<int>(vars_.size()) - 1;
}

int LinearModel::add_constraint(std::string name, std::vector<Term> terms,
                                Relation rel, double rhs, std::string category) {
  return add_bilinear_constraint(std::move(name), std::move(terms), {}, rel, rhs,
                                 std::move(category));
}

int LinearModel::add_bilinear_constraint(std::string name,
                                         std::vector<Term> terms,
                                         std::vector<BilinearTerm> bilinear,
                                         Relation rel, double rhs,
                                         std::string category) {
  Constraint c;
  c.name = std::move(name);
  c.terms = std::move(terms);
  c.bilinear = std::move(bilinear);
  c.rel = rel;
  c.rhs = rhs;
  c.category = std::move(category);
  const int nv = static_cast<int>(vars_.size());
  for (const Term& t : c.terms)
    if (t.var < 0 || t.var >= nv)
      fail(ErrorCode::validation,
           "constraint " + c.name + " references undeclared variable");
  for (const BilinearTerm& t : c.bilinear)
    if (t.x < 0 || t.x >= nv || t.y < 0 || t.y >= nv)
      fail(ErrorCode::validation,
           "constraint " + c.name + " references undeclared variable");
  cons_.push_back(std::move(c));
  return static_cast<int>(cons_.size()) - 1;
}

void LinearModel::set_objective(Sense sense, std::vector<Term> terms,
                                double constant) {
  const int nv = static_cast<int>(vars_.size());
  for (const Term& t : terms)
    if (t.var < 0 || t.var >= nv)
      fail(ErrorCode::validation, "objective references undeclared variable");
  sense_ = sense;
  objective_ = std::move(terms);
  obj_constant_ = constant;
}

bool LinearModel::has_binaries() const {
  return std::any_of(vars_.begin(), vars_.end(),
                     [](const Variable& v) { return v.kind == VarKind::binary; });
}

bool LinearModel::has_bilinear() const {
  return std::any_of(cons_.begin(), cons_.end(),
                     [](const Constraint& c) { return !c.bilinear.empty(); });
}

void LinearModel::validate() const {
  for (const Variable& v : vars_) {
    if (v.lower > v.upper)
      fail(ErrorCode::validation, "variable " + v.name + ": lower bound above upper");
    if (v.kind == VarKind::binary && (!std::isfinite(v.lower) || !std::isfinite(v.upper)))
      fail(ErrorCode::validation, "variable " + v.name + ": binary bounds must be finite");
  }
  for (const Constraint& c : cons_)
    if (!std::isfinite(c.rhs))
      fail(ErrorCode::validation, "constraint " + c.name + ": non-finite rhs");
}

int add_binary_product(LinearModel& m, const std::string& z_name, int x, int y) {
  const int nv = static_cast<int>(m.vars().size());
  if (x < 0 || x >= nv || y < 0 || y >= nv)
    fail(ErrorCode::validation, "add_binary_product: variable index out of range");
  const Variable& vx = m.vars()[x];
  const Variable& vy = m.vars()[y];
  if (vy.kind != VarKind::binary)
    fail(ErrorCode::validation, "add_binary_product: " + vy.name + " is not binary");
  if (!std::isfinite(vx.lower) || !std::isfinite(vx.upper))
    fail(ErrorCode::validation, "add_binary_product: " + vx.name +
                                    " needs explicit finite bounds");
  const double L = vx.lower, U = vx.upper;
  int z = m.add_var(z_name, std::min(L, 0.0), std::max(U, 0.0),
                    VarKind::continuous, "mccormick");
  // y = 0 forces z = 0; y = 1 forces z = x.
  m.add_constraint(z_name + "_ub_y", {{z, 1.0}, {y, -U}}, Relation::le, 0.0,
                   "mccormick");
  m.add_constraint(z_name + "_lb_y", {{z, 1.0}, {y, -L}}, Relation::ge, 0.0,
                   "mccormick");
  m.add_constraint(z_name + "_ub_x", {{z, 1.0}, {x, -1.0}, {y, -L}}, Relation::le,
                   -L, "mccormick");
  m.add_constraint(z_name + "_lb_x", {{z, 1.0}, {x, -1.0}, {y, -U}}, Relation::ge,
                   -U, "mccormick");
  return z;
}

namespace {

// Fixed-format MPS field layout: blank, 2-3, 5-12, 15-22, 25-36, 40-47, 50-61.
std::string mps_line(const std::string& f1, const std::string& f2,
                     const std::string& f3 = "", const std::string& f4 = "",
                     const std::string& f5 = "", const std::string& f6 = "") {
  auto put = [](std::string& s, std::size_t col, const std::string& v) {
    if (v.empty()) return;
    if (s.size() < col) s.resize(col, ' ');
    s += v;
  };
  std::string s;
  put(s, 1, f1);
  put(s, 4, f2);
  put(s, 14, f3);
  put(s, 24, f4);
  put(s, 39, f5);
  put(s, 49, f6);
  return s + "\n";
}

std::string mps_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string col_name(int j) { return "C" + std::to_string(j); }
std::string row_name(int i) { return "R" + std::to_string(i); }

std::string export_mps(const LinearModel& m) {
  if (m.has_bilinear())
    fail(ErrorCode::validation,
         "MPS cannot carry bilinear terms; use the model_json format");
  std::ostringstream out;
  out << "* Generated by voltsense (fixed-format MPS)\n";
  if (m.sense() == Sense::maximize)
    out << "* MAXIMIZE objective encoded as negated MINIMIZE\n";
  out << "NAME" << std::string(10, ' ') << m.name().substr(0, 8) << "\n";
  out << "ROWS\n";
  out << mps_line("N", "OBJ");
  for (std::size_t i = 0; i < m.constraints().size(); ++i) {
    const char* rel = m.constraints()[i].rel == Relation::le   ? "L"
                      : m.constraints()[i].rel == Relation::ge ? "G"
                                                               : "E";
    out << mps_line(rel, row_name(static_cast<int>(i)));
  }

  const double sgn = m.sense() == Sense::maximize ? -1.0 : 1.0;
  std::vector<double> obj(m.vars().size(), 0.0);
  for (const Term& t : m.objective()) obj[t.var] += sgn * t.coeff;

  // Column-major coefficient lists.
  std::vector<std::vector<std::pair<int, double>>> cols(m.vars().size());
  for (std::size_t i = 0; i < m.constraints().size(); ++i)
    for (const Term& t : m.constraints()[i].terms)
      cols[t.var].push_back({static_cast<int>(i), t.coeff});

  out << "COLUMNS\n";
  bool in_int = false;
  for (std::size_t j = 0; j < m.vars().size(); ++j) {
    bool is_int = m.vars()[j].kind == VarKind::binary;
    if (is_int && !in_int) {
      out << mps_line("", "MARK" + std::to_string(j), "'MARKER'", "", "'INTORG'");
      in_int = true;
    }
    if (!is_int && in_int) {
      out << mps_line("", "MARK" + std::to_string(j), "'MARKER'", "", "'INTEND'");
      in_int = false;
    }
    if (obj[j] != 0.0)
      out << mps_line("", col_name(static_cast<int>(j)), "OBJ", mps_num(obj[j]));
    for (const auto& [row, coeff] : cols[j])
      out << mps_line("", col_name(static_cast<int>(j)), row_name(row),
                      mps_num(coeff));
    if (obj[j] == 0.0 && cols[j].empty())
      out << mps_line("", col_name(static_cast<int>(j)), "OBJ", "0.0");
  }
  if (in_int) out << mps_line("", "MARKEND", "'MARKER'", "", "'INTEND'");

  out << "RHS\n";
  if (m.objective_constant() != 0.0)
    out << mps_line("", "RHS", "OBJ", mps_num(-sgn * m.objective_constant()));
  for (std::size_t i = 0; i < m.constraints().size(); ++i)
    if (m.constraints()[i].rhs != 0.0)
      out << mps_line("", "RHS", row_name(static_cast<int>(i)),
                      mps_num(m.constraints()[i].rhs));

  out << "BOUNDS\n";
  for (std::size_t j = 0; j < m.vars().size(); ++j) {
    const Variable& v = m.vars()[j];
    std::string cn = col_name(static_cast<int>(j));
    if (v.kind == VarKind::binary) {
      out << mps_line("BV", "BND", cn);
      continue;
    }
    bool lo_fin = std::isfinite(v.lower), up_fin = std::isfinite(v.upper);
    if (lo_fin && up_fin && v.lower == v.upper) {
      out << mps_line("FX", "BND", cn, mps_num(v.lower));
      continue;
    }
    if (!lo_fin && !up_fin) {
      out << mps_line("FR", "BND", cn);
      continue;
    }
    if (!lo_fin)
      out << mps_line("MI", "BND", cn);
    else if (v.lower != 0.0)
      out << mps_line("LO", "BND", cn, mps_num(v.lower));
    if (up_fin) out << mps_line("UP", "BND", cn, mps_num(v.upper));
  }
  out << "ENDATA\n";
  return out.str();
}

json bound_to_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

double bound_from_json(const json& j, double sign_inf) {
  if (j.is_null()) return sign_inf;
  return j.get<double>();
}

std::string rel_name(Relation r) {
  switch (r) {
    case Relation::le: return "le";
    case Relation::eq: return "eq";
    case Relation::ge: return "ge";
  }
  return "le";
}

Relation rel_from(const std::string& s) {
  if (s == "le") return Relation::le;
  if (s == "eq") return Relation::eq;
  if (s == "ge") return Relation::ge;
  fail(ErrorCode::parse, "model_json: unknown relation '" + s + "'");
}

std::string export_model_json(const LinearModel& m) {
  json jvars = json::array();
  for (const Variable& v : m.vars()) {
    jvars.push_back(json{{"name", v.name},
                         {"lower", bound_to_json(v.lower)},
                         {"upper", bound_to_json(v.upper)},
                         {"kind", v.kind == VarKind::binary ? "binary" : "continuous"},
                         {"category", v.category}});
  }
  json jcons = json::array();
  for (const Constraint& c : m.constraints()) {
    json terms = json::array();
    for (const Term& t : c.terms) terms.push_back(json{{"var", t.var}, {"coeff", t.coeff}});
    json jc{{"name", c.name},
            {"rel", rel_name(c.rel)},
            {"rhs", c.rhs},
            {"terms", terms},
            {"category", c.category}};
    if (!c.bilinear.empty()) {
      json bil = json::array();
      for (const BilinearTerm& t : c.bilinear)
        bil.push_back(json{{"x", t.x}, {"y", t.y}, {"coeff", t.coeff}});
      jc["bilinear"] = bil;
    }
    jcons.push_back(std::move(jc));
  }
  json jobj = json::array();
  for (const Term& t : m.objective())
    jobj.push_back(json{{"var", t.var}, {"coeff", t.coeff}});
  json doc{{"format", "voltsense-model"},
           {"version", 1},
           {"name", m.name()},
           {"sense", m.sense() == Sense::maximize ? "maximize" : "minimize"},
           {"objective", {{"constant", m.objective_constant()}, {"terms", jobj}}},
           {"variables", jvars},
           {"constraints", jcons}};
  return doc.dump(2) + "\n";
}

}  // namespace

std::string export_model(const LinearModel& m, const std::string& format) {
  m.validate();
  if (format == "mps") return export_mps(m);
  if (format == "model_json") return export_model_json(m);
  fail(ErrorCode::usage, "unknown model export format '" + format +
                             "' (expected mps or model_json)");
}

LinearModel import_model_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("model_json: invalid JSON: ") + e.what());
  }
  if (doc.value("format", "") != "voltsense-model")
    fail(ErrorCode::parse, "model_json: missing format tag 'voltsense-model'");
  LinearModel m;
  m.set_name(doc.value("name", "model"));
  for (const json& jv : doc.at("variables")) {
    m.add_var(jv.at("name").get<std::string>(),
              bound_from_json(jv.at("lower"), -kInf),
              bound_from_json(jv.at("upper"), kInf),
              jv.value("kind", "continuous") == "binary" ? VarKind::binary
                                                         : VarKind::continuous,
              jv.value("category", ""));
  }
  for (const json& jc : doc.at("constraints")) {
    std::vector<Term> terms;
    for (const json& jt : jc.at("terms"))
      terms.push_back({jt.at("var").get<int>(), jt.at("coeff").get<double>()});
    std::vector<BilinearTerm> bil;
    if (jc.contains("bilinear"))
      for (const json& jt : jc["bilinear"])
        bil.push_back({jt.at("x").get<int>(), jt.at("y").get<int>(),
                       jt.at("coeff").get<double>()});
    m.add_bilinear_constraint(jc.value("name", ""), std::move(terms), std::move(bil),
                              rel_from(jc.at("rel").get<std::string>()),
                              jc.at("rhs").get<double>(), jc.value("category", ""));
  }
  const json& jobj = doc.at("objective");
  std::vector<Term> obj;
  for (const json& jt : jobj.at("terms"))
    obj.push_back({jt.at("var").get<int>(), jt.at("coeff").get<double>()});
  m.set_objective(doc.value("sense", "minimize") == "maximize" ? Sense::maximize
                                                               : Sense::minimize,
                  std::move(obj), jobj.value("constant", 0.0));
  m.validate();
  return m;
}

}  // namespace vsp::lp
