#include "nlcs/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nlcs/error.hpp"

namespace nlcs {

namespace {

constexpr std::array<std::pair<Regularizer, std::string_view>, 7> kRegularizerNames{{
    {Regularizer::gsr, "gsr"},
    {Regularizer::gsrc, "gsrc"},
    {Regularizer::hsse, "hsse"},
    {Regularizer::nlr, "nlr"},
    {Regularizer::rrc, "rrc"},
    {Regularizer::lrgsc, "lrgsc"},
    {Regularizer::trunc, "trunc"},
}};

// Visits every serialized field in declaration order. Works for const and
// mutable configs so that printing and parsing share one field list.
template <class Cfg, class F>
void visit_fields(Cfg& c, F&& f) {
  f("block_size", c.block_size);
  f("sampling_rate", c.sampling_rate);
  f("ortho", c.ortho);
  f("noise_sigma", c.noise_sigma);
  f("patch_side", c.patch_side);
  f("group_size", c.group_size);
  f("search_window", c.search_window);
  f("patch_stride", c.patch_stride);
  f("match_every", c.match_every);
  f("outer_iters", c.outer_iters);
  f("inner_iters", c.inner_iters);
  f("eta", c.eta);
  f("lambda_decay", c.lambda_decay);
  f("rel_tol", c.rel_tol);
  f("mu", c.mu);
  f("lambda", c.lambda);
  f("rho", c.rho);
  f("tau", c.tau);
  f("h", c.h);
  f("k_wnnm", c.k_wnnm);
  f("eps_wnnm", c.eps_wnnm);
  f("trunc_rank", c.trunc_rank);
  f("regularizer", c.regularizer);
  f("gmm_components", c.gmm_components);
  f("em_iters", c.em_iters);
  f("seed", c.seed);
}

std::string format_value(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(std::uint64_t v) { return std::to_string(v); }
std::string format_value(bool v) { return v ? "true" : "false"; }
std::string format_value(Regularizer r) { return std::string(to_string(r)); }

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

template <class T>
void parse_number(std::string_view key, std::string_view text, T& out) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) bad_value(key, text);
  out = v;
}

void parse_value(std::string_view key, std::string_view text, double& out) { parse_number(key, text, out); }
void parse_value(std::string_view key, std::string_view text, int& out) { parse_number(key, text, out); }
void parse_value(std::string_view key, std::string_view text, std::uint64_t& out) {
  parse_number(key, text, out);
}
void parse_value(std::string_view key, std::string_view text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") {
    out = true;
  } else if (text == "false" || text == "0" || text == "no") {
    out = false;
  } else {
    bad_value(key, text);
  }
}
void parse_value(std::string_view, std::string_view text, Regularizer& out) {
  out = parse_regularizer(text);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_known_key(std::string_view key) {
  bool found = false;
  SolverConfig probe;
  visit_fields(probe, [&](std::string_view name, auto&) { found = found || name == key; });
  return found;
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid configuration: ") + what);
}

}  // namespace

std::string_view to_string(Regularizer r) noexcept {
  for (const auto& [value, name] : kRegularizerNames) {
    if (value == r) return name;
  }
  return "unknown";
}

Regularizer parse_regularizer(std::string_view name) {
  for (const auto& [value, n] : kRegularizerNames) {
    if (n == name) return value;
  }
  throw ConfigError("unknown regularizer '" + std::string(name) +
                    "' (expected gsr, gsrc, hsse, nlr, rrc, lrgsc or trunc)");
}

SolverConfig SolverConfig::defaults_for(Regularizer r) {
  SolverConfig c;
  c.regularizer = r;
  switch (r) {
    case Regularizer::gsr:
      c.lambda = 1.0e6;
      c.lambda_decay = 0.88;
      break;
    case Regularizer::gsrc:
      c.lambda = 300.0;
      c.lambda_decay = 0.95;
      c.h = 2.0e5;
      break;
    case Regularizer::hsse:
      c.lambda = 300.0;
      c.tau = 150.0;
      c.lambda_decay = 0.95;
      break;
    case Regularizer::nlr:
      c.lambda = 3.0e5;
      c.lambda_decay = 0.9;
      c.k_wnnm = 2.8;
      break;
    case Regularizer::rrc:
      c.lambda = 1000.0;
      c.lambda_decay = 0.95;
      c.h = 2.0e5;
      break;
    case Regularizer::lrgsc:
      c.lambda = 300.0;
      c.tau = 300.0;
      c.lambda_decay = 0.95;
      break;
    case Regularizer::trunc:
      c.trunc_rank = 8;
      break;
  }
  return c;
}

int SolverConfig::resolved_inner_iters() const noexcept {
  if (inner_iters > 0) return inner_iters;
  switch (regularizer) {
    case Regularizer::hsse:
      return 2;
    case Regularizer::lrgsc:
      return 3;
    default:
      return 1;
  }
}

void SolverConfig::validate() const {
  require(block_size >= 1, "block_size must be >= 1");
  require(sampling_rate > 0.0 && sampling_rate <= 1.0, "sampling_rate must lie in (0, 1]");
  require(noise_sigma >= 0.0, "noise_sigma must be >= 0");
  require(patch_side >= 1, "patch_side must be >= 1");
  require(patch_side <= block_size, "patch_side must not exceed block_size");
  require(group_size >= 1, "group_size must be >= 1");
  require(search_window >= patch_side, "search_window must be >= patch_side");
  require(patch_stride >= 1 && patch_stride <= patch_side, "patch_stride must lie in [1, patch_side]");
  require(match_every >= 1, "match_every must be >= 1");
  require(outer_iters >= 0, "outer_iters must be >= 0");
  require(inner_iters >= 0, "inner_iters must be >= 0");
  require(eta >= 0.0, "eta must be >= 0");
  require(lambda_decay > 0.0 && lambda_decay <= 1.0, "lambda_decay must lie in (0, 1]");
  require(rel_tol >= 0.0, "rel_tol must be >= 0");
  require(mu > 0.0, "mu must be > 0");
  require(rho > 0.0, "rho must be > 0");
  require(lambda >= 0.0, "lambda must be >= 0");
  require(tau >= 0.0, "tau must be >= 0");
  require(h > 0.0, "h must be > 0");
  require(k_wnnm >= 0.0, "k_wnnm must be >= 0");
  require(eps_wnnm > 0.0, "eps_wnnm must be > 0");
  require(trunc_rank >= 0, "trunc_rank must be >= 0");
  require(gmm_components >= 1, "gmm_components must be >= 1");
  require(em_iters >= 0, "em_iters must be >= 0");
}

std::string to_text(const SolverConfig& cfg) {
  std::ostringstream out;
  visit_fields(cfg, [&](std::string_view name, const auto& value) {
    out << name << " = " << format_value(value) << '\n';
  });
  return out.str();
}

ConfigOverrides parse_config_entries(std::string_view text) {
  ConfigOverrides entries;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!is_known_key(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" +
                        std::string(key) + "'");
    }
    entries.insert_or_assign(std::string(key), std::string(value));
  }
  return entries;
}

SolverConfig resolve_config(const ConfigOverrides& entries, std::optional<Regularizer> reg) {
  Regularizer effective = Regularizer::gsrc;
  if (reg) {
    effective = *reg;
  } else if (auto it = entries.find("regularizer"); it != entries.end()) {
    effective = parse_regularizer(it->second);
  }
  SolverConfig cfg = SolverConfig::defaults_for(effective);
  visit_fields(cfg, [&](std::string_view name, auto& field) {
    if (name == "regularizer") return;
    if (auto it = entries.find(name); it != entries.end()) parse_value(name, it->second, field);
  });
  cfg.regularizer = effective;
  return cfg;
}

SolverConfig parse_config(std::string_view text) {
  SolverConfig cfg = resolve_config(parse_config_entries(text));
  cfg.validate();
  return cfg;
}

SolverConfig load_config(const std::filesystem::path& path, std::optional<Regularizer> reg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  SolverConfig cfg = resolve_config(parse_config_entries(buf.str()), reg);
  cfg.validate();
  return cfg;
}

void save_config(const SolverConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << "# nlcs solver configuration\n" << to_text(cfg);
}

}  // namespace nlcs
