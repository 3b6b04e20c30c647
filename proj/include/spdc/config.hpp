#pragma once

// JSON run configuration. Unknown keys are rejected with the offending field path.

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "linear_optics.hpp"
#include "materials.hpp"
#include "observables.hpp"
#include "structure.hpp"

namespace spdc {

using json = nlohmann::json;

struct BasisSpec {
  int bins = 64;
  double window_lo = 0.05;  // fractions of the central pump frequency
  double window_hi = 0.95;
};

struct TemporalSpec {
  bool enabled = true;
  int samples = 2048;
};

struct Range {
  double lo = 0.0, hi = 0.0;
  int count = 1;
  double at(int i) const { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); }
};

struct ScanSpec {
  std::string material_1 = "GaN";
  std::string material_2 = "AlN";
  std::string ambient;    // empty: the structure's input ambient, else vacuum
  int periods = 10;
  Range l1{10e-9, 100e-9, 20};
  Range l2{10e-9, 100e-9, 20};
  int bins = 24;
  int max_jump = 2;       // ridge continuation limit in grid cells
  double floor = 0.0;     // minimum T_p for a ridge start
};

struct VerifySpec {
  int bins = 16;
  double step_divisor = 32.0;  // oracle step = min layer length / divisor
  double tolerance = 1e-4;
};

struct RunConfig {
  std::map<std::string, MaterialModel> materials;
  std::optional<StructureSpec> structure;
  PumpSpec pump;
  double pump_wavelength = 0.0;
  BasisSpec basis;
  std::vector<Channel> channels{Channel{}};
  TemporalSpec temporal;
  ScanSpec scan;
  VerifySpec verify;
  std::string output_dir = "out";
  int workers = 1;
  json source;  // the configuration as read (after file inclusion), for hashing

  const MaterialModel& material(const std::string& name) const {
    auto it = materials.find(name);
    if (it == materials.end()) throw ConfigError("unknown material '" + name + "'");
    return it->second;
  }
};

namespace detail {

/// Reads one JSON object, remembering which keys were consumed.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    if (!j_.contains(key)) return fallback;
    return req<T>(key);
  }

  template <class T>
  T req(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where(key) + ": missing required field");
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  const json& sub(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where(key) + ": missing required field");
    return j_.at(key);
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline Pol parse_pol(const std::string& s, const std::string& where) {
  if (s == "x" || s == "X") return Pol::X;
  if (s == "y" || s == "Y") return Pol::Y;
  throw ConfigError(where + ": polarisation must be \"x\" or \"y\"");
}

inline Dir parse_dir(const std::string& s, const std::string& where) {
  if (s == "F" || s == "f") return Dir::F;
  if (s == "B" || s == "b") return Dir::B;
  throw ConfigError(where + ": direction must be \"F\" or \"B\"");
}

/// "Fx" -> (F, x).
inline std::pair<Dir, Pol> parse_mode(const std::string& s, const std::string& where) {
  if (s.size() != 2) throw ConfigError(where + ": mode must look like \"Fx\"");
  return {parse_dir(s.substr(0, 1), where), parse_pol(s.substr(1, 1), where)};
}

inline Range parse_range(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": range must be [lo, hi, count]");
  Range r;
  try {
    r = {j[0].get<double>(), j[1].get<double>(), j[2].get<int>()};
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (r.count < 1 || !(r.lo > 0.0) || r.hi < r.lo) throw ConfigError(where + ": need 0 < lo <= hi and count >= 1");
  return r;
}

inline MaterialModel parse_material(const json& j, const std::string& path) {
  Fields f(j, path);
  const auto name = f.req<std::string>("name");
  f.get<std::string>("source", "");
  f.get<std::string>("note", "");
  Fields d(f.sub("dispersion"), f.where("dispersion"));
  const auto type = d.req<std::string>("type");
  Dispersion disp;
  if (type == "constant") {
    disp = ConstantIndex{d.req<double>("n")};
  } else if (type == "sellmeier") {
    Sellmeier s;
    s.a0 = d.req<double>("a0");
    const json& terms = d.sub("terms");
    if (!terms.is_array()) throw ConfigError(d.where("terms") + ": expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      Fields t(terms[i], d.where("terms") + "[" + std::to_string(i) + "]");
      s.terms.emplace_back(t.req<double>("b"), t.req<double>("c_um2"));
      t.finish();
    }
    disp = s;
  } else {
    throw ConfigError(d.where("type") + ": expected \"constant\" or \"sellmeier\"");
  }
  d.finish();
  std::map<PolTriple, double> chi2;
  if (f.has("chi2")) {
    const json& c = f.sub("chi2");
    if (!c.is_array()) throw ConfigError(f.where("chi2") + ": expected an array");
    for (std::size_t i = 0; i < c.size(); ++i) {
      Fields e(c[i], f.where("chi2") + "[" + std::to_string(i) + "]");
      try {
        chi2[parse_pol_triple(e.req<std::string>("pol"))] = e.req<double>("d_m_per_V");
      } catch (const ConfigError& err) {
        throw ConfigError(e.where("pol") + ": " + err.what());
      }
      e.finish();
    }
  }
  std::array<double, 2> window{1e-9, 1.0};
  if (f.has("window_m")) window = f.req<std::array<double, 2>>("window_m");
  f.finish();
  try {
    return MaterialModel(name, disp, chi2, window[0], window[1]);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void append_layers(const json& arr, const std::string& path, const RunConfig& cfg, std::vector<Layer>& out) {
  if (!arr.is_array()) throw ConfigError(path + ": expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    Fields f(arr[i], p);
    if (f.has("repeat")) {
      const int n = f.req<int>("repeat");
      if (n < 1) throw ConfigError(f.where("repeat") + ": must be >= 1");
      std::vector<Layer> block;
      append_layers(f.sub("layers"), f.where("layers"), cfg, block);
      f.finish();
      for (int r = 0; r < n; ++r) out.insert(out.end(), block.begin(), block.end());
      continue;
    }
    const auto name = f.req<std::string>("material");
    Layer l{cfg.material(name), f.req<double>("length_m"), f.get<int>("poling", 1)};
    f.finish();
    out.push_back(std::move(l));
  }
}

inline json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

}  // namespace detail

inline StructureSpec parse_structure(const json& j, const RunConfig& cfg, const std::string& path = "structure") {
  detail::Fields f(j, path);
  const auto in = f.req<std::string>("ambient_in");
  const auto out = f.get<std::string>("ambient_out", in);
  std::vector<Layer> layers;
  detail::append_layers(f.sub("layers"), f.where("layers"), cfg, layers);
  f.get<std::string>("note", "");
  f.finish();
  return StructureSpec(cfg.material(in), std::move(layers), cfg.material(out));
}

/// Builds a run configuration from parsed JSON. Relative file references resolve against base_dir.
inline RunConfig parse_config(const json& root, const std::filesystem::path& base_dir = ".") {
  RunConfig cfg;
  detail::Fields f(root, "");
  json resolved = root;

  // Materials: inline list and/or external file.
  std::vector<json> material_lists;
  if (f.has("materials_file")) {
    const json m = detail::read_json_file(base_dir / f.req<std::string>("materials_file"));
    detail::Fields mf(m, "materials_file");
    material_lists.push_back(mf.sub("materials"));
    mf.finish();
    resolved["materials_file_content"] = m;
  }
  if (f.has("materials")) material_lists.push_back(f.sub("materials"));
  for (const json& list : material_lists) {
    if (!list.is_array()) throw ConfigError("materials: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      MaterialModel m = detail::parse_material(list[i], "materials[" + std::to_string(i) + "]");
      if (cfg.materials.count(m.name())) throw ConfigError("materials: duplicate name '" + m.name() + "'");
      cfg.materials.emplace(m.name(), std::move(m));
    }
  }

  if (f.has("structure_file")) {
    const json s = detail::read_json_file(base_dir / f.req<std::string>("structure_file"));
    cfg.structure = parse_structure(s, cfg, "structure_file");
    resolved["structure_file_content"] = s;
  } else if (f.has("structure")) {
    cfg.structure = parse_structure(f.sub("structure"), cfg);
  }

  {
    detail::Fields p(f.sub("pump"), "pump");
    cfg.pump_wavelength = p.req<double>("wavelength_m");
    if (!(cfg.pump_wavelength > 0.0)) throw ConfigError("pump.wavelength_m: must be positive");
    const double fwhm = p.req<double>("fwhm_wavelength_m");
    if (!(fwhm > 0.0)) throw ConfigError("pump.fwhm_wavelength_m: must be positive");
    cfg.pump.omega0 = omega_from_wavelength(cfg.pump_wavelength);
    cfg.pump.sigma = PumpSpec::sigma_from_fwhm_wavelength(cfg.pump_wavelength, fwhm);
    cfg.pump.energy_per_area = p.req<double>("energy_per_area_J_per_m2");
    cfg.pump.polarization = detail::parse_pol(p.get<std::string>("polarization", "y"), "pump.polarization");
    cfg.pump.side = detail::parse_dir(p.get<std::string>("side", "F"), "pump.side");
    p.finish();
    try {
      cfg.pump.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("pump: ") + e.what());
    }
  }

  if (f.has("basis")) {
    detail::Fields b(f.sub("basis"), "basis");
    cfg.basis.bins = b.get<int>("bins", cfg.basis.bins);
    cfg.basis.window_lo = b.get<double>("window_lo", cfg.basis.window_lo);
    cfg.basis.window_hi = b.get<double>("window_hi", cfg.basis.window_hi);
    b.finish();
  }
  if (cfg.basis.bins < 1) throw ConfigError("basis.bins: must be >= 1");
  if (!(cfg.basis.window_lo > 0.0) || !(cfg.basis.window_hi > cfg.basis.window_lo))
    throw ConfigError("basis: need 0 < window_lo < window_hi");

  if (f.has("channels")) {
    const json& c = f.sub("channels");
    if (!c.is_array() || c.empty()) throw ConfigError("channels: expected a non-empty array");
    cfg.channels.clear();
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string p = "channels[" + std::to_string(i) + "]";
      detail::Fields ch(c[i], p);
      auto [a, alpha] = detail::parse_mode(ch.req<std::string>("signal"), ch.where("signal"));
      auto [b, beta] = detail::parse_mode(ch.req<std::string>("idler"), ch.where("idler"));
      ch.finish();
      cfg.channels.push_back({a, b, alpha, beta});
    }
  }

  if (f.has("temporal")) {
    detail::Fields t(f.sub("temporal"), "temporal");
    cfg.temporal.enabled = t.get<bool>("enabled", cfg.temporal.enabled);
    cfg.temporal.samples = t.get<int>("samples", cfg.temporal.samples);
    t.finish();
    if (cfg.temporal.samples < 16) throw ConfigError("temporal.samples: must be >= 16");
  }

  if (f.has("scan")) {
    detail::Fields s(f.sub("scan"), "scan");
    cfg.scan.material_1 = s.get<std::string>("material_1", cfg.scan.material_1);
    cfg.scan.material_2 = s.get<std::string>("material_2", cfg.scan.material_2);
    cfg.scan.ambient = s.get<std::string>("ambient", cfg.scan.ambient);
    cfg.scan.periods = s.get<int>("periods", cfg.scan.periods);
    if (s.has("l1_range_m")) cfg.scan.l1 = detail::parse_range(s.sub("l1_range_m"), "scan.l1_range_m");
    if (s.has("l2_range_m")) cfg.scan.l2 = detail::parse_range(s.sub("l2_range_m"), "scan.l2_range_m");
    cfg.scan.bins = s.get<int>("bins", cfg.scan.bins);
    cfg.scan.max_jump = s.get<int>("max_jump_cells", cfg.scan.max_jump);
    cfg.scan.floor = s.get<double>("ridge_floor", cfg.scan.floor);
    s.finish();
    if (cfg.scan.periods < 1 || cfg.scan.bins < 1 || cfg.scan.max_jump < 0) throw ConfigError("scan: invalid values");
  }

  if (f.has("verify")) {
    detail::Fields v(f.sub("verify"), "verify");
    cfg.verify.bins = v.get<int>("bins", cfg.verify.bins);
    cfg.verify.step_divisor = v.get<double>("step_divisor", cfg.verify.step_divisor);
    cfg.verify.tolerance = v.get<double>("tolerance", cfg.verify.tolerance);
    v.finish();
    if (cfg.verify.step_divisor < 16.0) throw ConfigError("verify.step_divisor: must be >= 16");
  }

  cfg.output_dir = f.get<std::string>("output_dir", cfg.output_dir);
  cfg.workers = f.get<int>("workers", cfg.workers);
  f.get<std::string>("note", "");
  f.finish();
  cfg.source = std::move(resolved);
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& file) {
  return parse_config(detail::read_json_file(file), file.parent_path().empty() ? "." : file.parent_path());
}

/// Stable 64-bit FNV-1a hash of the canonical JSON dump.
inline std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace spdc
