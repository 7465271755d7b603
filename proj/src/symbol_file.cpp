#include "hypclass/symbol_file.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "hypclass/error.hpp"

namespace hypclass {

namespace {

struct Line {
  std::string text;  // comment stripped, trimmed
  std::size_t offset = 0;  // byte offset of text in the file
  std::size_t number = 0;
};

std::string_view trim(std::string_view s, std::size_t* lead = nullptr) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  if (lead) *lead = a;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const Line& l, const std::string& msg, std::size_t col = 0) {
  throw ParseError(msg, l.offset + col, l.number);
}

class Reader {
 public:
  Reader(const std::map<std::string, double>& params, int n) : ctx_{n, params} {}

  Expr expr(const Line& l, std::string_view text, std::size_t col) const {
    try {
      Expr e = parse(text, ctx_);
      if (ctx_.n >= 0 && max_index(e) > ctx_.n) fail(l, "variable index exceeds n = " + std::to_string(ctx_.n), col);
      return e;
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(e.message(), l.offset + col + e.position(), l.number);
    }
  }

  double constant(const Line& l, std::string_view text, std::size_t col) const {
    Expr e = expr(l, text, col);
    if (max_index(e) >= 0) fail(l, "expected a constant", col);
    try {
      return eval(e, PhasePoint(0));
    } catch (const Error& err) {
      fail(l, err.what(), col);
    }
  }

  ParseContext& ctx() { return ctx_; }

 private:
  ParseContext ctx_;
};

// "key = value" with the column of value.
bool split_kv(const Line& l, std::string& key, std::string_view& value, std::size_t& col) {
  std::string_view s = l.text;
  std::size_t eq = s.find('=');
  if (eq == std::string_view::npos) return false;
  key = std::string(trim(s.substr(0, eq)));
  std::size_t lead = 0;
  value = trim(s.substr(eq + 1), &lead);
  col = eq + 1 + lead;
  return !key.empty();
}

std::vector<std::pair<std::string_view, std::size_t>> words(std::string_view s) {
  std::vector<std::pair<std::string_view, std::size_t>> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i), i);
    i = j;
  }
  return out;
}

const std::vector<std::string> kSections{"header", "params", "phi", "theta", "nu", "R", "theta_ext", "k", "region"};

}  // namespace

Problem parse_symbol_text(std::string_view text, const std::string& label) {
  std::map<std::string, std::vector<Line>> sections;
  std::map<std::string, Line> headers;
  std::string current;
  std::size_t pos = 0, number = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    std::size_t hash = raw.find('#');
    if (hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::size_t lead = 0;
    std::string_view body = trim(raw, &lead);
    Line line{std::string(body), pos + lead, number};
    if (!body.empty()) {
      if (body.front() == '[') {
        if (body.back() != ']') fail(line, "unterminated section header");
        current = std::string(trim(body.substr(1, body.size() - 2)));
        bool known = false;
        for (const auto& s : kSections) known = known || s == current;
        if (!known) fail(line, "unknown section [" + current + "]");
        if (headers.count(current)) fail(line, "duplicate section [" + current + "]");
        headers[current] = line;
        sections[current];
      } else {
        if (current.empty()) fail(line, "content before the first section");
        sections[current].push_back(line);
      }
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  if (!headers.count("header")) throw ParseError("missing [header] section", 0, 1);
  if (!headers.count("phi")) throw ParseError("missing [phi] section", 0, 1);

  SymbolSpec spec;
  spec.name = label;
  spec.n = -1;
  std::optional<Line> base_x, base_xi;
  for (const Line& l : sections["header"]) {
    std::string key;
    std::string_view value;
    std::size_t col;
    if (!split_kv(l, key, value, col)) fail(l, "expected key = value");
    if (key == "name") {
      spec.name = std::string(value);
    } else if (key == "n" || key == "r") {
      int v = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size() || v < (key == "n" ? 1 : 0))
        fail(l, key + " must be a " + (key == "n" ? "positive" : "nonnegative") + " integer", col);
      if (key == "n")
        spec.n = v;
      else
        spec.declared_rank = v;
    } else if (key == "base_x") {
      base_x = l;
    } else if (key == "base_xi") {
      base_xi = l;
    } else {
      fail(l, "unknown header key '" + key + "'");
    }
  }
  if (spec.n < 1) fail(headers["header"], "header must set n");

  std::map<std::string, double> params;
  Reader reader(params, spec.n);
  for (const Line& l : sections["params"]) {
    std::string key;
    std::string_view value;
    std::size_t col;
    if (!split_kv(l, key, value, col)) fail(l, "expected name = value");
    if (params.count(key)) fail(l, "parameter '" + key + "' declared twice");
    params[key] = reader.constant(l, value, col);
    reader.ctx().params = params;
  }

  auto point_row = [&](const std::optional<Line>& l, std::vector<double>& out) {
    if (!l) return;
    std::string key;
    std::string_view value;
    std::size_t col;
    split_kv(*l, key, value, col);
    auto ws = words(value);
    if (ws.size() != static_cast<std::size_t>(spec.n + 1))
      fail(*l, key + " needs " + std::to_string(spec.n + 1) + " entries", col);
    for (std::size_t i = 0; i < ws.size(); ++i) out[i] = reader.constant(*l, ws[i].first, col + ws[i].second);
  };
  PhasePoint base(spec.n);
  base.xi[spec.n] = 1.0;
  point_row(base_x, base.x);
  point_row(base_xi, base.xi);
  if (base.xi_prime_norm() == 0.0) fail(base_xi ? *base_xi : headers["header"], "base point needs xi' != 0");
  spec.base_point = base;

  for (const Line& l : sections["phi"]) spec.phis.push_back(reader.expr(l, l.text, 0));
  if (spec.phis.empty()) fail(headers["phi"], "[phi] is empty");
  if (spec.declared_rank && *spec.declared_rank > static_cast<int>(spec.phis.size()))
    fail(headers["header"], "declared r exceeds the number of phi");

  auto single = [&](const std::string& name) -> std::optional<Expr> {
    if (!headers.count(name)) return std::nullopt;
    const auto& lines = sections[name];
    if (lines.size() != 1) fail(headers[name], "[" + name + "] takes exactly one expression");
    return reader.expr(lines[0], lines[0].text, 0);
  };
  std::optional<Expr> theta = single("theta");
  std::optional<Expr> nu = single("nu");
  if (nu) theta = theta ? *theta + *nu : *nu;
  spec.theta = theta;
  spec.remainder = single("R");
  std::optional<Expr> theta_ext = single("theta_ext");

  std::vector<Expr> tangency;
  for (const Line& l : sections["k"]) tangency.push_back(reader.expr(l, l.text, 0));

  Region region;
  for (const Line& l : sections["region"]) {
    std::string key;
    std::string_view value;
    std::size_t col;
    if (!split_kv(l, key, value, col)) fail(l, "expected key = value");
    auto ws = words(value);
    auto one = [&]() {
      if (ws.size() != 1) fail(l, key + " takes one value", col);
      return reader.constant(l, ws[0].first, col + ws[0].second);
    };
    if (key == "box") {
      region.box = one();
      if (!(region.box > 0.0)) fail(l, "box must be positive", col);
    } else if (key == "samples") {
      double v = one();
      if (v < 1 || v != static_cast<int>(v)) fail(l, "samples must be a positive integer", col);
      region.samples = static_cast<int>(v);
    } else if (key == "seed") {
      if (ws.size() != 1) fail(l, "seed takes one value", col);
      std::uint64_t v = 0;
      auto w = ws[0].first;
      auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
      if (ec != std::errc() || ptr != w.data() + w.size()) fail(l, "seed must be an unsigned integer", col);
      region.seed = v;
    } else if (key == "shells") {
      region.shells.clear();
      for (const auto& [w, c] : ws) {
        double e = reader.constant(l, w, col + c);
        if (!(e > 0.0 && e < 1.0)) fail(l, "shell distances must lie in (0, 1)", col + c);
        region.shells.push_back(e);
      }
      if (region.shells.empty()) fail(l, "shells needs at least one value", col);
    } else if (key == "sweep") {
      if (ws.size() != 4) fail(l, "sweep = <var> <lo> <hi> <steps>", col);
      Expr v = reader.expr(l, ws[0].first, col + ws[0].second);
      if (v.op() != Op::Variable) fail(l, "sweep variable must be a coordinate", col + ws[0].second);
      region.sweep_var = v.variable();
      region.sweep_lo = reader.constant(l, ws[1].first, col + ws[1].second);
      region.sweep_hi = reader.constant(l, ws[2].first, col + ws[2].second);
      double steps = reader.constant(l, ws[3].first, col + ws[3].second);
      if (steps < 2 || steps != static_cast<int>(steps)) fail(l, "sweep steps must be an integer >= 2", col);
      region.sweep_steps = static_cast<int>(steps);
      if (!(region.sweep_hi > region.sweep_lo)) fail(l, "sweep needs lo < hi", col);
    } else {
      fail(l, "unknown region key '" + key + "'");
    }
  }

  const Line& hdr = headers["header"];
  SymbolSystem sys(std::move(spec));
  // The base point only has to reach Sigma after projection.
  try {
    PhasePoint on = project_to_sigma(sys, sys.base_point());
    require_on_sigma(sys, on);
    SymbolSpec fixed = sys.spec();
    fixed.base_point = on;
    sys = SymbolSystem(std::move(fixed));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    fail(hdr, std::string("base point does not project onto Sigma: ") + e.what());
  }

  std::map<std::string, std::string> shown;
  for (const auto& [k, v] : params) shown[k] = num(v);
  Problem pb{sys.name(), sys, region, nu, theta_ext, tangency, shown};
  if (label != "<text>") pb.label = label;
  return pb;
}

Problem load_symbol_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open symbol file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_symbol_text(ss.str(), path);
}

}  // namespace hypclass
