#include "fran/config_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fran {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

class Section {
 public:
  Section(const ConfigDoc& doc, const std::string& name) {
    auto it = doc.find(name);
    if (it != doc.end()) kv_ = &it->second;
  }
  bool has(const std::string& key) const { return kv_ && kv_->count(key); }
  std::string str(const std::string& key, const std::string& fallback) const {
    return has(key) ? kv_->at(key) : fallback;
  }
  double num(const std::string& key, double fallback) const {
    return has(key) ? std::stod(kv_->at(key)) : fallback;
  }
  long integer(const std::string& key, long fallback) const {
    return has(key) ? std::stol(kv_->at(key)) : fallback;
  }
  std::vector<std::string> list(const std::string& key) const {
    return has(key) ? split_list(kv_->at(key)) : std::vector<std::string>{};
  }
  // Scalar broadcast or one entry per element.
  std::vector<double> num_list(const std::string& key, int n,
                               const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    auto items = list(key);
    std::vector<double> out;
    for (const auto& s : items) out.push_back(std::stod(s));
    if (static_cast<int>(out.size()) == 1) out.assign(n, out[0]);
    if (static_cast<int>(out.size()) != n)
      throw std::invalid_argument("config: " + key + " needs 1 or " + std::to_string(n) +
                                  " values");
    return out;
  }

 private:
  const std::map<std::string, std::string>* kv_ = nullptr;
};

}  // namespace

ConfigDoc parse_config(const std::string& text) {
  ConfigDoc doc;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing '='");
    doc[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return doc;
}

ConfigDoc parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

SystemConfig desk_default_config() {
  SystemConfig cfg = make_symmetric_config(/*num_errh=*/3, /*num_ue=*/3, /*antennas=*/1,
                                           /*library_size=*/3, /*file_size=*/1.0,
                                           /*zipf_exponent=*/0.5, /*capacity=*/1.0,
                                           /*power=*/100.0, /*mu=*/1.0 / 3.0,
                                           /*noise=*/1.0);
  cfg.cell_radius = 500.0;
  cfg.pathloss_ref = 50.0;
  cfg.pathloss_exp = 3.0;
  return cfg;
}

SystemConfig system_from_config(const ConfigDoc& doc) {
  Section sec(doc, "system");
  SystemConfig base = desk_default_config();
  SystemConfig cfg;
  cfg.num_errh = static_cast<int>(sec.integer("num_errh", base.num_errh));
  cfg.num_ue = static_cast<int>(sec.integer("num_ue", base.num_ue));
  auto to_int = [](const std::vector<double>& v) {
    std::vector<int> out;
    for (double x : v) out.push_back(static_cast<int>(x));
    return out;
  };
  cfg.antennas_errh = to_int(sec.num_list("antennas_errh", cfg.num_errh,
                                          std::vector<double>(cfg.num_errh, 1.0)));
  cfg.antennas_ue =
      to_int(sec.num_list("antennas_ue", cfg.num_ue, std::vector<double>(cfg.num_ue, 1.0)));
  cfg.library_size = static_cast<int>(sec.integer("library_size", base.library_size));
  cfg.file_size = sec.num("file_size", base.file_size);
  cfg.zipf_exponent = sec.num("zipf_exponent", base.zipf_exponent);
  cfg.fronthaul_capacity = sec.num_list(
      "fronthaul_capacity", cfg.num_errh,
      std::vector<double>(cfg.num_errh, base.fronthaul_capacity[0]));
  cfg.power_budget = sec.num_list("power_budget", cfg.num_errh,
                                  std::vector<double>(cfg.num_errh, base.power_budget[0]));
  cfg.fractional_cache =
      sec.num_list("fractional_cache", cfg.num_errh,
                   std::vector<double>(cfg.num_errh, base.fractional_cache[0]));
  cfg.noise_level = sec.num("noise_level", base.noise_level);
  cfg.cell_radius = sec.num("cell_radius", base.cell_radius);
  cfg.pathloss_ref = sec.num("pathloss_ref", base.pathloss_ref);
  cfg.pathloss_exp = sec.num("pathloss_exp", base.pathloss_exp);
  cfg.validate();
  return cfg;
}

CccpSettings cccp_from_config(const ConfigDoc& doc) {
  Section sec(doc, "cccp");
  CccpSettings s;
  s.max_outer_iters = static_cast<int>(sec.integer("max_outer_iters", s.max_outer_iters));
  s.rel_improvement_tol = sec.num("rel_improvement_tol", s.rel_improvement_tol);
  s.restarts = static_cast<int>(sec.integer("restarts", s.restarts));
  return s;
}

SweepSpec sweep_from_config(const ConfigDoc& doc) {
  Section sec(doc, "sweep");
  SweepSpec spec;
  spec.base = system_from_config(doc);
  spec.settings = cccp_from_config(doc);
  spec.param = sweep_param_from_string(sec.str("sweep_param", "gamma"));
  for (const auto& s : sec.list("grid")) spec.grid.push_back(std::stod(s));
  std::vector<int> nf_list;
  for (const auto& s : sec.list("nf_list")) nf_list.push_back(std::stoi(s));
  if (nf_list.empty()) nf_list.push_back(1);
  auto mode_names = sec.list("modes");
  if (mode_names.empty()) mode_names = {"soft"};
  for (const auto& name : mode_names) {
    TransferMode m = transfer_mode_from_string(name);
    if (m == TransferMode::kSoft) {
      spec.modes.push_back({m, -1});
    } else {
      for (int nf : nf_list) spec.modes.push_back({m, nf});
    }
  }
  auto pf_names = sec.list("prefetchers");
  if (pf_names.empty()) pf_names = {"cmp"};
  for (const auto& name : pf_names) spec.prefetchers.push_back(prefetcher_from_string(name));
  spec.trials = static_cast<int>(sec.integer("trials", 20));
  spec.base_seed = static_cast<std::uint64_t>(sec.integer("base_seed", 1));
  spec.validate();
  return spec;
}

SolveCase solve_case_from_config(const ConfigDoc& doc) {
  Section sec(doc, "solve");
  SolveCase sc;
  sc.mode = transfer_mode_from_string(sec.str("mode", "soft"));
  sc.prefetcher = prefetcher_from_string(sec.str("prefetcher", "cmp"));
  sc.nf = static_cast<int>(sec.integer("nf", sc.mode == TransferMode::kSoft ? -1 : 1));
  sc.seed = static_cast<std::uint64_t>(sec.integer("seed", 1));
  return sc;
}

}  // namespace fran
