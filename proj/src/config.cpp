#include "boxlevelset/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace boxlevelset {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ValidationError("config: '" + std::string(key) + "' expects a number, got '" +
                          std::string(value) + "'");
  return out;
}

int to_int(std::string_view key, std::string_view value) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ValidationError("config: '" + std::string(key) + "' expects an integer, got '" +
                          std::string(value) + "'");
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ValidationError("config: '" + std::string(key) + "' expects true/false, got '" +
                        std::string(value) + "'");
}

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void RunConfig::validate() const {
  energy.validate();
  evolve.validate();
  if (!(enlarge_factor >= 1.0)) throw ValidationError("enlarge_factor must be >= 1");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "alpha1",      "alpha2",          "lambda",         "mu",
      "rho_cls",     "sigmoid_slope",   "eps_grad",       "eps_denom",
      "step_size",   "max_iters",       "tol",            "backtrack_factor",
      "snapshot_every", "max_halvings", "use_levelset",   "use_constraints",
      "enlarge_factor"};
  return keys;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  EnergyParams& e = cfg.energy;
  EvolveConfig& v = cfg.evolve;
  if (key == "alpha1") e.alpha1 = to_double(key, value);
  else if (key == "alpha2") e.alpha2 = to_double(key, value);
  else if (key == "lambda") e.lambda = to_double(key, value);
  else if (key == "mu") e.mu = to_double(key, value);
  else if (key == "rho_cls") {
    if (value == "none") e.rho_default.reset();
    else e.rho_default = to_double(key, value);
  } else if (key.starts_with("rho_cls.")) {
    e.rho_per_class[to_int(key, key.substr(8))] = to_double(key, value);
  } else if (key == "sigmoid_slope") e.sigmoid_slope = to_double(key, value);
  else if (key == "eps_grad") e.eps_grad = to_double(key, value);
  else if (key == "eps_denom") e.eps_denom = to_double(key, value);
  else if (key == "step_size") v.step_size = to_double(key, value);
  else if (key == "max_iters") v.max_iters = to_int(key, value);
  else if (key == "tol") v.tol = to_double(key, value);
  else if (key == "backtrack_factor") v.backtrack_factor = to_double(key, value);
  else if (key == "snapshot_every") v.snapshot_every = to_int(key, value);
  else if (key == "max_halvings") v.max_halvings = to_int(key, value);
  else if (key == "use_levelset") v.use_levelset = to_bool(key, value);
  else if (key == "use_constraints") v.use_constraints = to_bool(key, value);
  else if (key == "enlarge_factor") cfg.enlarge_factor = to_double(key, value);
  else throw ValidationError("config: unknown key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      apply_setting(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ValidationError& err) {
      throw ValidationError("config line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string format_config(const RunConfig& cfg) {
  const EnergyParams& e = cfg.energy;
  const EvolveConfig& v = cfg.evolve;
  std::ostringstream out;
  out << "alpha1 = " << num(e.alpha1) << "\n"
      << "alpha2 = " << num(e.alpha2) << "\n"
      << "lambda = " << num(e.lambda) << "\n"
      << "mu = " << num(e.mu) << "\n"
      << "rho_cls = " << (e.rho_default ? num(*e.rho_default) : std::string("none")) << "\n";
  for (const auto& [cls, rho] : e.rho_per_class) out << "rho_cls." << cls << " = " << num(rho) << "\n";
  out << "sigmoid_slope = " << num(e.sigmoid_slope) << "\n"
      << "eps_grad = " << num(e.eps_grad) << "\n"
      << "eps_denom = " << num(e.eps_denom) << "\n"
      << "step_size = " << num(v.step_size) << "\n"
      << "max_iters = " << v.max_iters << "\n"
      << "tol = " << num(v.tol) << "\n"
      << "backtrack_factor = " << num(v.backtrack_factor) << "\n"
      << "snapshot_every = " << v.snapshot_every << "\n"
      << "max_halvings = " << v.max_halvings << "\n"
      << "use_levelset = " << (v.use_levelset ? "true" : "false") << "\n"
      << "use_constraints = " << (v.use_constraints ? "true" : "false") << "\n"
      << "enlarge_factor = " << num(cfg.enlarge_factor) << "\n";
  return out.str();
}

}  // namespace boxlevelset
