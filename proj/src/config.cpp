#include "nsbf/config.hpp"

#include <boost/math/interpolators/makima.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nsbf/errors.hpp"
#include "nsbf/expr.hpp"

namespace nsbf {

namespace {

using nlohmann::json;

// ---- TOML subset -------------------------------------------------------------

class TomlLine {
 public:
  TomlLine(std::string_view text, int line) : s_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string key() {
    skip_ws();
    if (peek() == '"') return basic_string();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
      ++pos_;
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  json value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number();
  }

 private:
  std::string basic_string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        switch (s_[pos_++]) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail("unsupported escape sequence");
        }
      }
      out += c;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string literal_string() {
    const std::size_t end = s_.find('\'', pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(s_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }

  json array() {
    ++pos_;
    json arr = json::array();
    if (peek() == ']') {
      ++pos_;
      return arr;
    }
    for (;;) {
      arr.push_back(value());
      const char c = peek();
      ++pos_;
      if (c == ']') return arr;
      if (c != ',') fail("expected ',' or ']' in array");
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
    }
  }

  json number() {
    skip_ws();
    std::size_t end = pos_;
    while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '.' || s_[end] == '+' ||
                               s_[end] == '-' || s_[end] == '_'))
      ++end;
    std::string tok;
    for (std::size_t k = pos_; k < end; ++k)
      if (s_[k] != '_') tok += s_[k];
    if (tok.empty()) fail("expected a value");
    const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    pos_ = end;
    if (tok.find_first_of(".eE") == std::string::npos || tok == "inf" || tok == "nan") {
      long long i = 0;
      auto [p, ec] = std::from_chars(first, last, i);
      if (ec == std::errc() && p == last) return i;
    }
    double d = 0;
    auto [p, ec] = std::from_chars(first, last, d);
    if (ec != std::errc() || p != last) fail("cannot parse value '" + tok + "'");
    return d;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

// ---- typed access with clear messages ---------------------------------------------

std::string where(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

double get_number(const json& j, const std::string& section, const std::string& key) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    // numeric fields also take constant expressions such as "pi" or "2*8"
    const cplx v = Expr::parse(j.get<std::string>()).evaluate();
    if (!Expr::parse(j.get<std::string>()).is_constant() || v.imag() != 0.0)
      throw ConfigError(where(section, key) + " must be a real constant");
    return v.real();
  }
  throw ConfigError(where(section, key) + " must be a number");
}

long long get_integer(const json& j, const std::string& section, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(where(section, key) + " must be an integer");
  return j.get<long long>();
}

std::string get_string(const json& j, const std::string& section, const std::string& key) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.dump();
  throw ConfigError(where(section, key) + " must be a string");
}

void check_keys(const json& obj, const std::string& section, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("[" + section + "] must be a table");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError("unknown key " + where(section, k));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r"), b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  return out;
}

double parse_cell(const std::string& cell, int line) {
  double v = 0;
  const char* first = cell.data() + (!cell.empty() && cell[0] == '+' ? 1 : 0);
  auto [p, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec != std::errc() || p != cell.data() + cell.size() || !std::isfinite(v))
    throw ConfigError("line " + std::to_string(line) + ": cannot parse '" + cell + "'");
  return v;
}

}  // namespace

nlohmann::json parse_toml(std::string_view text) {
  json doc = json::object();
  json* table = &doc;
  std::set<std::string> seen_tables;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    start = end + 1;
    ++line_no;
    TomlLine line(raw, line_no);
    if (line.at_end()) continue;
    if (line.peek() == '[') {
      line.expect('[');
      const std::string name = line.key();
      line.expect(']');
      if (!line.at_end()) line.fail("unexpected text after table header");
      if (!seen_tables.insert(name).second) line.fail("table [" + name + "] defined twice");
      if (doc.contains(name)) line.fail("table [" + name + "] clashes with a key");
      doc[name] = json::object();
      table = &doc[name];
      continue;
    }
    const std::string key = line.key();
    line.expect('=');
    json v = line.value();
    if (!line.at_end()) line.fail("unexpected text after value");
    if (table->contains(key)) line.fail("duplicate key '" + key + "'");
    (*table)[key] = std::move(v);
    if (end == text.size()) break;
  }
  return doc;
}

ProblemConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("configuration must be a table/object");
  check_keys(doc, "", {"potential", "potential_csv", "particular_solution", "b", "grid", "coefficients", "boundary",
                       "search", "output"});
  ProblemConfig c;
  if (doc.contains("potential")) c.potential = get_string(doc["potential"], "", "potential");
  if (doc.contains("potential_csv")) {
    c.potential_csv = get_string(doc["potential_csv"], "", "potential_csv");
    if (c.potential_csv.is_relative() && !base_dir.empty()) c.potential_csv = base_dir / c.potential_csv;
  }
  if (c.potential.empty() == c.potential_csv.empty())
    throw ConfigError("give exactly one of potential or potential_csv");
  if (doc.contains("particular_solution"))
    c.particular_solution = get_string(doc["particular_solution"], "", "particular_solution");
  if (!doc.contains("b")) throw ConfigError("missing interval length b");
  c.b = get_number(doc["b"], "", "b");
  if (!(std::isfinite(c.b) && c.b > 0)) throw ConfigError("b must be positive");

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    check_keys(g, "grid", {"kind", "n"});
    if (g.contains("kind")) {
      const auto k = get_string(g["kind"], "grid", "kind");
      if (k == "uniform")
        c.grid_kind = GridKind::uniform;
      else if (k == "chebyshev")
        c.grid_kind = GridKind::chebyshev;
      else
        throw ConfigError("grid.kind must be uniform or chebyshev");
    }
    if (g.contains("n")) {
      const auto n = get_integer(g["n"], "grid", "n");
      if (n < 6) throw ConfigError("grid.n must be at least 6");
      c.grid_n = static_cast<std::size_t>(n);
    }
  }
  if (doc.contains("coefficients")) {
    const auto& k = doc["coefficients"];
    check_keys(k, "coefficients", {"N"});
    if (k.contains("N")) {
      const auto N = get_integer(k["N"], "coefficients", "N");
      if (N < 1 || N > 100000) throw ConfigError("coefficients.N must be positive");
      c.N = static_cast<int>(N);
    }
  }
  if (doc.contains("boundary")) {
    const auto& bc = doc["boundary"];
    check_keys(bc, "boundary", {"alpha0", "mu0", "alphab", "mub"});
    if (bc.contains("alpha0")) c.alpha0 = get_string(bc["alpha0"], "boundary", "alpha0");
    if (bc.contains("mu0")) c.mu0 = get_string(bc["mu0"], "boundary", "mu0");
    if (bc.contains("alphab")) c.alphab = get_string(bc["alphab"], "boundary", "alphab");
    if (bc.contains("mub")) c.mub = get_string(bc["mub"], "boundary", "mub");
  }
  if (doc.contains("search")) {
    const auto& s = doc["search"];
    check_keys(s, "search", {"mode", "count", "omega_max", "nu_max", "rectangle", "max_zeros"});
    if (s.contains("mode")) {
      const auto m = get_string(s["mode"], "search", "mode");
      if (m == "real")
        c.mode = SearchMode::real;
      else if (m == "complex")
        c.mode = SearchMode::complex;
      else
        throw ConfigError("search.mode must be real or complex");
    }
    if (s.contains("count")) {
      const auto n = get_integer(s["count"], "search", "count");
      if (n < 0) throw ConfigError("search.count must be >= 0");
      c.real.count = static_cast<int>(n);
    }
    if (s.contains("omega_max")) c.real.omega_max = get_number(s["omega_max"], "search", "omega_max");
    if (s.contains("nu_max")) c.real.nu_max = get_number(s["nu_max"], "search", "nu_max");
    if (!(std::isfinite(c.real.omega_max) && c.real.omega_max >= 0)) throw ConfigError("search.omega_max must be >= 0");
    if (!std::isfinite(c.real.nu_max)) throw ConfigError("search.nu_max must be finite");
    if (s.contains("rectangle")) {
      const auto& r = s["rectangle"];
      if (!r.is_array() || r.size() != 4)
        throw ConfigError("search.rectangle must be [re_min, re_max, im_min, im_max]");
      c.rectangle = {get_number(r[0], "search", "rectangle"), get_number(r[1], "search", "rectangle"),
                     get_number(r[2], "search", "rectangle"), get_number(r[3], "search", "rectangle")};
    }
    if (s.contains("max_zeros")) {
      const auto n = get_integer(s["max_zeros"], "search", "max_zeros");
      if (n < 1) throw ConfigError("search.max_zeros must be positive");
      c.max_zeros = static_cast<int>(n);
    }
  }
  const bool has_target = doc.contains("search") && (doc["search"].contains("count") ||
                                                    doc["search"].contains("omega_max") ||
                                                    doc["search"].contains("nu_max"));
  if (c.mode == SearchMode::real && (!has_target || (c.real.count == 0 && c.real.omega_max == 0 && c.real.nu_max == 0)))
    throw ConfigError("real search needs count, omega_max or nu_max");
  if (c.mode == SearchMode::complex && !(c.rectangle.re1 > c.rectangle.re0 && c.rectangle.im1 > c.rectangle.im0))
    throw ConfigError("complex search needs a non-empty rectangle");

  if (doc.contains("output")) {
    const auto& o = doc["output"];
    check_keys(o, "output", {"format", "path"});
    if (o.contains("format")) c.format = get_string(o["format"], "output", "format");
    if (o.contains("path")) {
      c.output = get_string(o["path"], "output", "path");
      if (c.output.is_relative() && !base_dir.empty()) c.output = base_dir / c.output;
    }
  }
  if (c.format != "json" && c.format != "csv") throw ConfigError("output.format must be json or csv");
  return c;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  if (path.extension() == ".json") {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  } else {
    try {
      doc = parse_toml(text);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return config_from_json(doc, path.parent_path());
}

TabulatedPotential load_tabulated_potential(const std::filesystem::path& csv, const GridPtr& grid) {
  std::istringstream in(read_file(csv));
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) header = split_csv(line);
  }
  const bool complex_cols = header == std::vector<std::string>{"x", "re", "im"};
  if (!complex_cols && header != std::vector<std::string>{"x", "q"})
    throw ConfigError(csv.string() + ": header must be x,re,im or x,q");

  std::vector<double> x, re, im;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw ConfigError(csv.string() + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " fields, expected " + std::to_string(header.size()));
    x.push_back(parse_cell(cells[0], line_no));
    re.push_back(parse_cell(cells[1], line_no));
    im.push_back(complex_cols ? parse_cell(cells[2], line_no) : 0.0);
    if (x.size() > 1 && !(x.back() > x[x.size() - 2]))
      throw ConfigError(csv.string() + ": x must be strictly increasing (line " + std::to_string(line_no) + ")");
  }
  if (x.size() < 2) throw ConfigError(csv.string() + ": need at least two data rows");
  const double b = grid->b(), slack = 1e-12 * b;
  if (x.front() > slack || x.back() < b - slack)
    throw ConfigError(csv.string() + ": data cover [" + std::to_string(x.front()) + ", " + std::to_string(x.back()) +
                      "], not [0, " + std::to_string(b) + "]");

  TabulatedPotential out;
  std::vector<cplx> v(grid->size());
  if (x.size() < 4) {
    out.warnings.push_back(csv.string() + ": only " + std::to_string(x.size()) +
                           " rows, using linear interpolation");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double t = std::clamp(grid->node(i), x.front(), x.back());
      std::size_t k = std::upper_bound(x.begin(), x.end(), t) - x.begin();
      k = std::clamp<std::size_t>(k, 1, x.size() - 1);
      const double w = (t - x[k - 1]) / (x[k] - x[k - 1]);
      v[i] = {(1 - w) * re[k - 1] + w * re[k], (1 - w) * im[k - 1] + w * im[k]};
    }
  } else {
    out.warnings.push_back(csv.string() + ": potential interpolated from " + std::to_string(x.size()) +
                           " tabulated values; interpolation error adds to the discretisation error");
    using boost::math::interpolators::makima;
    const bool has_im = std::any_of(im.begin(), im.end(), [](double t) { return t != 0.0; });
    auto xr = x;
    makima<std::vector<double>> fr(std::move(xr), std::move(re));
    std::optional<makima<std::vector<double>>> fi;
    if (has_im) {
      auto xi = x;
      fi.emplace(std::move(xi), std::move(im));
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double t = std::clamp(grid->node(i), x.front(), x.back());
      v[i] = {fr(t), fi ? (*fi)(t) : 0.0};
    }
  }
  out.q = SampledFunction(grid, std::move(v));
  return out;
}

SampledFunction potential_samples(const ProblemConfig& cfg, const GridPtr& grid, std::vector<std::string>& warnings) {
  if (!cfg.potential_csv.empty()) {
    auto t = load_tabulated_potential(cfg.potential_csv, grid);
    warnings.insert(warnings.end(), t.warnings.begin(), t.warnings.end());
    return std::move(t.q);
  }
  return sample(Expr::parse(cfg.potential), grid);
}

BoundaryCondition boundary_condition(const ProblemConfig& cfg) {
  return BoundaryCondition::parse(cfg.alpha0, cfg.mu0, cfg.alphab, cfg.mub);
}

}  // namespace nsbf
