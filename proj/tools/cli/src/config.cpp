#include "qhit_app/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qhit::app {

namespace pt = boost::property_tree;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<double> LawSpec::t_grid() const {
  std::vector<double> out;
  if (t_count == 1) return {t_max};
  for (std::size_t i = 0; i < t_count; ++i)
    out.push_back(t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(t_count - 1));
  return out;
}

namespace {

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(key + ": '" + s + "' is not a number");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(key + ": '" + s + "' is not a nonnegative integer");
  return v;
}

std::int64_t to_i64(const std::string& key, const std::string& s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(key + ": '" + s + "' is not an integer");
  return v;
}

/// Typed access to one section that also records which keys were consumed.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  void get(const std::string& key, double& out) {
    if (auto v = raw(key)) out = to_double(qualified(key), *v);
  }
  void get(const std::string& key, std::size_t& out) {
    if (auto v = raw(key)) out = static_cast<std::size_t>(to_u64(qualified(key), *v));
  }
  void get(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (auto v = raw(key)) {
      out.clear();
      for (const auto& s : split_list(*v)) out.push_back(to_double(qualified(key), s));
    }
  }
  void get(const std::string& key, std::vector<std::size_t>& out) {
    if (auto v = raw(key)) {
      out.clear();
      for (const auto& s : split_list(*v)) out.push_back(static_cast<std::size_t>(to_u64(qualified(key), s)));
    }
  }
  void get(const std::string& key, std::vector<std::int64_t>& out) {
    if (auto v = raw(key)) {
      out.clear();
      for (const auto& s : split_list(*v)) out.push_back(to_i64(qualified(key), s));
    }
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_)
      if (!used_.count(key)) throw ConfigError("unknown key " + qualified(key));
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>)
      out += format_double(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  static const std::set<std::string> known{"system", "driving", "grid", "law", "short_returns", "audit", "output"};
  for (const auto& [name, child] : root) {
    if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");
    if (child.empty() && !child.data().empty()) throw ConfigError("key '" + name + "' outside any section");
  }
  auto section = [&](const std::string& name) {
    auto it = root.find(name);
    return Section(it == root.not_found() ? nullptr : &it->second, name);
  };

  ExperimentConfig c;
  {
    Section s = section("system");
    std::string family = "expanding", coefficient = "standard";
    s.get("family", family);
    if (family == "expanding")
      c.system.family = Family::expanding;
    else if (family == "pm")
      c.system.family = Family::pm;
    else
      throw ConfigError("system.family must be 'expanding' or 'pm', got '" + family + "'");
    if (auto v = s.raw("slopes")) {
      c.system.slopes.clear();
      for (const auto& item : split_list(*v)) {
        const auto slope = to_u64("system.slopes", item);
        if (slope > 0xFFFF) throw ConfigError("system.slopes: slope too large");
        c.system.slopes.push_back(static_cast<unsigned>(slope));
      }
    }
    s.get("alpha0", c.system.alpha0);
    s.get("alpha1", c.system.alpha1);
    s.get("pm_coefficient", coefficient);
    if (coefficient == "standard")
      c.system.coefficient = PmCoefficient::standard;
    else if (coefficient == "clamped")
      c.system.coefficient = PmCoefficient::clamped;
    else
      throw ConfigError("system.pm_coefficient must be 'standard' or 'clamped'");
    s.reject_unknown();
  }
  {
    Section s = section("driving");
    s.get("weights", c.driving.weights);
    std::size_t seed = c.driving.seed;
    s.get("seed", seed);
    c.driving.seed = seed;
    s.reject_unknown();
  }
  {
    Section s = section("grid");
    s.get("bins", c.grid.bins);
    s.get("n_pull", c.grid.n_pull);
    s.get("n_omega", c.grid.n_omega);
    s.get("fibers", c.grid.fibers);
    s.reject_unknown();
  }
  {
    Section s = section("law");
    s.get("rho", c.law.rho);
    s.get("t_min", c.law.t_min);
    s.get("t_max", c.law.t_max);
    s.get("t_count", c.law.t_count);
    s.get("n_samples", c.law.n_samples);
    s.get("max_iter_factor", c.law.max_iter_factor);
    s.get("n_centers", c.law.n_centers);
    s.get("centers", c.law.centers);
    s.get("center_margin", c.law.center_margin);
    s.get("kac_samples", c.law.kac_samples);
    s.reject_unknown();
  }
  {
    Section s = section("short_returns");
    s.get("a", c.short_returns.a);
    s.get("b", c.short_returns.b);
    s.get("rho", c.short_returns.rho);
    s.get("n_centers", c.short_returns.n_centers);
    s.get("n_max", c.short_returns.n_max);
    s.reject_unknown();
  }
  {
    Section s = section("audit");
    auto& a = c.audit;
    s.get("bins", a.bins);
    s.get("n_pull", a.n_pull);
    s.get("ensemble", a.ensemble);
    s.get("corr_ensemble", a.corr_ensemble);
    s.get("n_centers", a.n_centers);
    s.get("rho", a.rho_grid);
    s.get("annulus_fractions", a.annulus_fractions);
    s.get("k_grid", a.k_grid);
    s.get("diameter_n_lo", a.diameter_n_lo);
    s.get("diameter_n_hi", a.diameter_n_hi);
    s.get("distortion_n_max", a.distortion_n_max);
    s.get("cell_cap", a.cell_cap);
    s.get("center_margin", a.center_margin);
    s.get("decay_floor", a.decay_floor);
    std::size_t seed = a.seed;
    s.get("seed", seed);
    a.seed = seed;
    s.reject_unknown();
  }
  {
    Section s = section("output");
    s.get("dir", c.out_dir);
    s.get("threads", c.threads);
    s.reject_unknown();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[system]\n";
  o << "family = " << (c.system.family == Family::pm ? "pm" : "expanding") << "\n";
  o << "slopes = " << join(c.system.slopes) << "\n";
  o << "alpha0 = " << format_double(c.system.alpha0) << "\n";
  o << "alpha1 = " << format_double(c.system.alpha1) << "\n";
  o << "pm_coefficient = " << (c.system.coefficient == PmCoefficient::clamped ? "clamped" : "standard") << "\n\n";
  o << "[driving]\n";
  o << "weights = " << join(c.driving.weights) << "\n";
  o << "seed = " << c.driving.seed << "\n\n";
  o << "[grid]\n";
  o << "bins = " << c.grid.bins << "\n";
  o << "n_pull = " << c.grid.n_pull << "\n";
  o << "n_omega = " << c.grid.n_omega << "\n";
  o << "fibers = " << join(c.grid.fibers) << "\n\n";
  o << "[law]\n";
  o << "rho = " << join(c.law.rho) << "\n";
  o << "t_min = " << format_double(c.law.t_min) << "\n";
  o << "t_max = " << format_double(c.law.t_max) << "\n";
  o << "t_count = " << c.law.t_count << "\n";
  o << "n_samples = " << c.law.n_samples << "\n";
  o << "max_iter_factor = " << format_double(c.law.max_iter_factor) << "\n";
  o << "n_centers = " << c.law.n_centers << "\n";
  o << "centers = " << join(c.law.centers) << "\n";
  o << "center_margin = " << format_double(c.law.center_margin) << "\n";
  o << "kac_samples = " << c.law.kac_samples << "\n\n";
  o << "[short_returns]\n";
  o << "a = " << format_double(c.short_returns.a) << "\n";
  o << "b = " << format_double(c.short_returns.b) << "\n";
  o << "rho = " << join(c.short_returns.rho) << "\n";
  o << "n_centers = " << c.short_returns.n_centers << "\n";
  o << "n_max = " << c.short_returns.n_max << "\n\n";
  const auto& a = c.audit;
  o << "[audit]\n";
  o << "bins = " << a.bins << "\n";
  o << "n_pull = " << a.n_pull << "\n";
  o << "ensemble = " << a.ensemble << "\n";
  o << "corr_ensemble = " << a.corr_ensemble << "\n";
  o << "n_centers = " << a.n_centers << "\n";
  o << "rho = " << join(a.rho_grid) << "\n";
  o << "annulus_fractions = " << join(a.annulus_fractions) << "\n";
  o << "k_grid = " << join(a.k_grid) << "\n";
  o << "diameter_n_lo = " << a.diameter_n_lo << "\n";
  o << "diameter_n_hi = " << a.diameter_n_hi << "\n";
  o << "distortion_n_max = " << a.distortion_n_max << "\n";
  o << "cell_cap = " << a.cell_cap << "\n";
  o << "center_margin = " << format_double(a.center_margin) << "\n";
  o << "decay_floor = " << format_double(a.decay_floor) << "\n";
  o << "seed = " << a.seed << "\n\n";
  o << "[output]\n";
  o << "dir = " << c.out_dir << "\n";
  o << "threads = " << c.threads << "\n";
  return o.str();
}

void ExperimentConfig::validate() const {
  const auto& s = system;
  if (s.family == Family::expanding) {
    if (s.slopes.empty()) throw ConfigError("system.slopes must list at least one slope");
    for (unsigned k : s.slopes)
      if (k < 2) throw ConfigError("system.slopes must all be at least 2");
    if (driving.weights.size() != s.slopes.size())
      throw ConfigError("driving.weights needs one weight per slope");
  } else {
    if (!(0.0 < s.alpha0 && s.alpha0 < s.alpha1 && s.alpha1 < 1.0))
      throw ConfigError("system: PM family requires 0 < alpha0 < alpha1 < 1");
    if (driving.weights.size() != 2) throw ConfigError("driving.weights needs two weights for the PM family");
  }
  try {
    driving.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (grid.bins < 2) throw ConfigError("grid.bins must be at least 2");
  if (grid.n_pull == 0 || grid.n_omega == 0) throw ConfigError("grid counts must be positive");
  if (law.rho.empty()) throw ConfigError("law.rho must list at least one radius");
  for (double r : law.rho)
    if (!(r > 0.0 && r < 0.5)) throw ConfigError("law.rho values must lie in (0, 1/2)");
  if (!(law.t_min > 0.0 && law.t_max >= law.t_min) || law.t_count == 0 ||
      (law.t_count > 1 && !(law.t_max > law.t_min)))
    throw ConfigError("law: need 0 < t_min < t_max and t_count >= 1");
  if (law.n_samples == 0 || law.kac_samples == 0) throw ConfigError("law sample counts must be positive");
  if (!(law.max_iter_factor >= 2.0)) throw ConfigError("law.max_iter_factor must be at least 2");
  if (law.centers.empty() && law.n_centers == 0) throw ConfigError("law.n_centers must be positive");
  for (double x : law.centers)
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("law.centers must lie in [0, 1]");
  if (!(law.center_margin >= 0.0 && law.center_margin < 1.0)) throw ConfigError("law.center_margin must lie in [0, 1)");
  if (!(short_returns.a >= 0.0)) throw ConfigError("short_returns.a must be nonnegative (0 selects the default)");
  if (!(short_returns.b > 0.0 && short_returns.b < 1.0)) throw ConfigError("short_returns.b must lie in (0, 1)");
  if (short_returns.rho.empty()) throw ConfigError("short_returns.rho must list at least one radius");
  for (double r : short_returns.rho)
    if (!(r > 0.0 && r < 0.5)) throw ConfigError("short_returns.rho values must lie in (0, 1/2)");
  if (short_returns.n_centers == 0 || short_returns.n_max == 0) throw ConfigError("short_returns counts must be positive");
  try {
    audit.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (out_dir.empty()) throw ConfigError("output.dir must not be empty");
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> out;
  if (system.family == Family::pm && system.alpha1 >= 1.0 / 3.0)
    out.push_back("alpha1 >= 1/3: outside the range where the PM hitting-time theorem applies");
  if (system.family == Family::pm && system.coefficient == PmCoefficient::clamped)
    out.push_back("clamped PM coefficient: the left branch is clamped at 1 and is not a full branch onto [0, 1)");
  return out;
}

MapSystem ExperimentConfig::make_system() const {
  std::vector<FiberMap> maps;
  if (system.family == Family::expanding) {
    for (unsigned s : system.slopes) maps.push_back(FiberMap::multiply_mod1(s));
  } else {
    maps.push_back(FiberMap::pomeau_manneville(system.alpha0, system.coefficient));
    maps.push_back(FiberMap::pomeau_manneville(system.alpha1, system.coefficient));
  }
  return MapSystem(std::move(maps));
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return system == o.system && driving == o.driving && grid == o.grid && law == o.law &&
         short_returns == o.short_returns && audit == o.audit && out_dir == o.out_dir && threads == o.threads;
}

}  // namespace qhit::app
