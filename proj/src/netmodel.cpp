#include "voltsense/netmodel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <queue>
#include <sstream>

namespace vsp::net {

Network::Network(std::vector<Bus> buses, std::vector<Line> lines,
                 double base_mva)
    : buses_(std::move(buses)), lines_(std::move(lines)), base_mva_(base_mva) {
  validate();
}

std::size_t Network::index_of(int bus_id) const {
  auto it = id_index_.find(bus_id);
  if (it == id_index_.end())
    fail(ErrorCode::validation, "unknown bus id " + std::to_string(bus_id));
  return it->second;
}

namespace {

// Connectivity over closed lines from the slack bus.
std::vector<bool> reachable(const Network& net) {
  std::vector<std::vector<std::size_t>> adj(net.size());
  for (const auto& ln : net.lines()) {
    if (ln.status != LineStatus::closed) continue;
    std::size_t a = net.index_of(ln.from);
    std::size_t b = net.index_of(ln.to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(net.size(), false);
  std::queue<std::size_t> q;
  q.push(net.slack_index());
  seen[net.slack_index()] = true;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (std::size_t v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        q.push(v);
      }
  }
  return seen;
}

}  // namespace

void Network::validate() {
  if (buses_.empty()) fail(ErrorCode::validation, "network has no buses");
  if (!(base_mva_ > 0)) fail(ErrorCode::validation, "base_mva must be positive");

  id_index_.clear();
  std::size_t slack_count = 0;
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    const Bus& b = buses_[i];
    if (!id_index_.emplace(b.id, i).second)
      fail(ErrorCode::validation, "duplicate bus id " + std::to_string(b.id));
    if (!(b.v_min < b.v_max))
      fail(ErrorCode::validation,
           "bus " + std::to_string(b.id) + ": v_min must be below v_max");
    if (b.kind == BusKind::slack) {
      slack_index_ = i;
      ++slack_count;
    }
    if (b.voltvar && !b.voltvar->valid())
      fail(ErrorCode::validation,
           "bus " + std::to_string(b.id) + ": invalid volt-VAR curve");
  }
  if (slack_count != 1)
    fail(ErrorCode::validation, "network must have exactly one slack bus, found " +
                                    std::to_string(slack_count));

  for (std::size_t l = 0; l < lines_.size(); ++l) {
    const Line& ln = lines_[l];
    if (ln.from == ln.to)
      fail(ErrorCode::validation,
           "line " + std::to_string(l + 1) + ": from == to");
    if (id_index_.find(ln.from) == id_index_.end())
      fail(ErrorCode::validation, "line " + std::to_string(l + 1) +
                                      ": undeclared bus " + std::to_string(ln.from));
    if (id_index_.find(ln.to) == id_index_.end())
      fail(ErrorCode::validation, "line " + std::to_string(l + 1) +
                                      ": undeclared bus " + std::to_string(ln.to));
    if (ln.r < 0)
      fail(ErrorCode::validation, "line " + std::to_string(l + 1) + ": negative r");
    if (ln.r == 0.0 && ln.x == 0.0)
      fail(ErrorCode::validation,
           "line " + std::to_string(l + 1) + ": r and x both zero");
  }

  pq_indices_.clear();
  pq_position_.assign(buses_.size(), npos);
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (buses_[i].kind == BusKind::pq) {
      pq_position_[i] = pq_indices_.size();
      pq_indices_.push_back(i);
    }
  }

  auto seen = reachable(*this);
  for (std::size_t i = 0; i < buses_.size(); ++i)
    if (!seen[i])
      fail(ErrorCode::validation, "bus " + std::to_string(buses_[i].id) +
                                      " is not reachable from the slack bus");
}

namespace {

struct MatpowerSource {
  std::string text;
  std::vector<std::size_t> line_starts;  // offsets of each physical line

  std::size_t line_of(std::size_t offset) const {
    std::size_t lo = 0, hi = line_starts.size();
    while (lo + 1 < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (line_starts[mid] <= offset)
        lo = mid;
      else
        hi = mid;
    }
    return lo + 1;  // 1-based
  }
};

MatpowerSource strip_comments(const std::string& raw) {
  MatpowerSource src;
  src.text.reserve(raw.size());
  src.line_starts.push_back(0);
  bool in_comment = false;
  for (char c : raw) {
    if (c == '\n') {
      in_comment = false;
      src.text.push_back('\n');
      src.line_starts.push_back(src.text.size());
      continue;
    }
    if (c == '%') in_comment = true;
    src.text.push_back(in_comment ? ' ' : c);
  }
  return src;
}

double parse_scalar_assignment(const MatpowerSource& src, const std::string& name) {
  auto pos = src.text.find(name);
  if (pos == std::string::npos)
    fail(ErrorCode::parse, "matpower case: missing " + name);
  auto eq = src.text.find('=', pos);
  if (eq == std::string::npos)
    fail(ErrorCode::parse, "matpower case: malformed assignment for " + name);
  std::istringstream ss(src.text.substr(eq + 1));
  double v;
  if (!(ss >> v))
    fail(ErrorCode::parse, "matpower case: non-numeric value for " + name);
  return v;
}

std::vector<std::vector<double>> parse_matrix(const MatpowerSource& src,
                                              const std::string& name) {
  auto pos = src.text.find(name);
  if (pos == std::string::npos)
    fail(ErrorCode::parse, "matpower case: missing matrix " + name);
  auto open = src.text.find('[', pos);
  auto close = src.text.find(']', open == std::string::npos ? pos : open);
  if (open == std::string::npos || close == std::string::npos)
    fail(ErrorCode::parse, "matpower case: unterminated matrix " + name);

  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  std::size_t i = open + 1;
  while (i < close) {
    char c = src.text[i];
    if (c == ';' || c == '\n') {
      if (!row.empty()) rows.push_back(std::move(row));
      row.clear();
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < close && !std::isspace(static_cast<unsigned char>(src.text[i])) &&
           src.text[i] != ';' && src.text[i] != ',')
      ++i;
    std::string tok = src.text.substr(start, i - start);
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      row.push_back(v);
    } catch (const std::exception&) {
      fail(ErrorCode::parse, "matpower case: non-numeric token '" + tok +
                                 "' in " + name + " at line " +
                                 std::to_string(src.line_of(start)));
    }
  }
  if (!row.empty()) rows.push_back(std::move(row));
  if (rows.empty())
    fail(ErrorCode::parse, "matpower case: empty matrix " + name);
  return rows;
}

}  // namespace

Network parse_matpower(const std::string& text) {
  MatpowerSource src = strip_comments(text);
  double base_mva = parse_scalar_assignment(src, "mpc.baseMVA");
  auto bus_rows = parse_matrix(src, "mpc.bus");
  auto branch_rows = parse_matrix(src, "mpc.branch");

  std::vector<Bus> buses;
  buses.reserve(bus_rows.size());
  for (const auto& row : bus_rows) {
    if (row.size() < 4)
      fail(ErrorCode::parse, "matpower case: bus row with fewer than 4 columns");
    Bus b;
    b.id = static_cast<int>(row[0]);
    int type = static_cast<int>(row[1]);
    switch (type) {
      case 3:
        b.kind = BusKind::slack;
        break;
      case 1:
      case 2:  // PV buses are treated as PQ at their given injections
        b.kind = BusKind::pq;
        break;
      default:
        fail(ErrorCode::parse, "matpower case: unsupported bus type " +
                                   std::to_string(type) + " at bus " +
                                   std::to_string(b.id));
    }
    b.p_nom = -row[2] / base_mva;
    b.q_nom = -row[3] / base_mva;
    if (row.size() >= 13) {
      b.v_max = row[11];
      b.v_min = row[12];
    }
    buses.push_back(b);
  }

  std::vector<Line> lines;
  lines.reserve(branch_rows.size());
  for (const auto& row : branch_rows) {
    if (row.size() < 4)
      fail(ErrorCode::parse, "matpower case: branch row with fewer than 4 columns");
    Line ln;
    ln.from = static_cast<int>(row[0]);
    ln.to = static_cast<int>(row[1]);
    ln.r = row[2];
    ln.x = row[3];
    ln.b_sh = row.size() > 4 ? row[4] : 0.0;
    bool closed = row.size() > 10 ? row[10] != 0.0 : true;
    ln.status = closed ? LineStatus::closed : LineStatus::open;
    lines.push_back(ln);
  }

  return Network(std::move(buses), std::move(lines), base_mva);
}

Eigen::MatrixXcd build_admittance(const Network& net) {
  const std::size_t n = net.size();
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& ln : net.lines()) {
    if (ln.status != LineStatus::closed) continue;
    std::size_t a = net.index_of(ln.from);
    std::size_t b = net.index_of(ln.to);
    std::complex<double> ys = 1.0 / std::complex<double>(ln.r, ln.x);
    std::complex<double> ysh(0.0, ln.b_sh / 2.0);
    y(a, b) -= ys;
    y(b, a) -= ys;
    y(a, a) += ys + ysh;
    y(b, b) += ys + ysh;
  }
  return y;
}

Network apply_configuration(const Network& net, const Configuration& cfg) {
  std::vector<Line> lines = net.lines();
  for (const auto& ovr : cfg.line_status_overrides) {
    if (ovr.line >= lines.size())
      fail(ErrorCode::validation,
           "configuration '" + cfg.name + "': line index " +
               std::to_string(ovr.line) + " out of range");
    lines[ovr.line].status = ovr.status;
  }
  try {
    return Network(net.buses(), std::move(lines), net.base_mva());
  } catch (const Error& e) {
    fail(e.code(), "configuration '" + cfg.name + "': " + e.what());
  }
}

std::vector<int> leaf_buses(const Network& net) {
  std::vector<int> degree(net.size(), 0);
  for (const auto& ln : net.lines()) {
    if (ln.status != LineStatus::closed) continue;
    ++degree[net.index_of(ln.from)];
    ++degree[net.index_of(ln.to)];
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < net.size(); ++i)
    if (degree[i] == 1 && i != net.slack_index())
      out.push_back(net.id_of(i));
  std::sort(out.begin(), out.end());
  return out;
}

bool is_radial(const Network& net) {
  std::size_t closed = 0;
  for (const auto& ln : net.lines())
    if (ln.status == LineStatus::closed) ++closed;
  return closed + 1 == net.size();  // connected is guaranteed by validation
}

}  // namespace vsp::net
