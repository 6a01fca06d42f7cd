#include "ccop/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ccop {
namespace {

using json = json_io::json;
using ordered_json = json_io::ordered_json;

ordered_json index_list(const std::vector<int>& v) {
  ordered_json arr = ordered_json::array();
  for (int i : v) arr.push_back(i);
  return arr;
}

InnerStatus inner_status_from(const std::string& s) {
  for (auto st : {InnerStatus::Converged, InnerStatus::IterLimit, InnerStatus::LineSearchFail,
                  InnerStatus::Diverged}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown inner status '" + s + "'");
}

double num(const json& j, const char* key) { return json_io::to_double(j.at(key), key); }

}  // namespace

ordered_json to_json(const FeasibilityReport& f) {
  ordered_json j;
  j["viol_g"] = f.viol_g;
  j["viol_h"] = f.viol_h;
  j["viol_comp"] = f.viol_comp;
  j["viol_card"] = f.viol_card;
  j["viol_box"] = f.viol_box;
  j["viol_l0"] = f.viol_l0;
  return j;
}

ordered_json to_json(const IterationRecord& row) {
  ordered_json j;
  j["record"] = "iter";
  j["k"] = row.k;
  j["rho_prev"] = row.rho_prev;
  j["rho"] = row.rho;
  j["eps"] = row.eps;
  j["feas"] = to_json(row.feas);
  j["mult_norm"] = row.mult_norm;
  j["progress_prev"] = row.progress_prev;
  j["progress"] = row.progress;
  j["rho_increased"] = row.rho_increased;
  j["inner_iters"] = row.inner_iters;
  j["inner_status"] = std::string(to_string(row.inner_status));
  j["inner_grad_norm"] = row.inner_grad_norm;
  j["objective"] = row.objective;
  j["ccm_residual"] = row.ccm_residual;
  j["pam_triggered"] = row.pam_triggered;
  j["pam_min_product"] = row.pam_min_product;
  j["divergence_warning"] = row.divergence_warning;
  return j;
}

IterationRecord record_from_json(const json& j) {
  IterationRecord r;
  r.k = j.at("k").get<int>();
  r.rho_prev = num(j, "rho_prev");
  r.rho = num(j, "rho");
  r.eps = num(j, "eps");
  const json& f = j.at("feas");
  r.feas.viol_g = num(f, "viol_g");
  r.feas.viol_h = num(f, "viol_h");
  r.feas.viol_comp = num(f, "viol_comp");
  r.feas.viol_card = num(f, "viol_card");
  r.feas.viol_box = num(f, "viol_box");
  r.feas.viol_l0 = f.at("viol_l0").get<int>();
  r.mult_norm = num(j, "mult_norm");
  r.progress_prev = num(j, "progress_prev");
  r.progress = num(j, "progress");
  r.rho_increased = j.at("rho_increased").get<bool>();
  r.inner_iters = j.at("inner_iters").get<int>();
  r.inner_status = inner_status_from(j.at("inner_status").get<std::string>());
  r.inner_grad_norm = num(j, "inner_grad_norm");
  r.objective = num(j, "objective");
  r.ccm_residual = num(j, "ccm_residual");
  r.pam_triggered = j.at("pam_triggered").get<int>();
  r.pam_min_product = num(j, "pam_min_product");
  r.divergence_warning = j.at("divergence_warning").get<bool>();
  return r;
}

ordered_json to_json(const Certificate& cert) {
  ordered_json j;
  j["ccm_residual"] = cert.ccm.residual;
  j["lam"] = json_io::to_json(cert.ccm.lam);
  j["mu"] = json_io::to_json(cert.ccm.mu);
  j["gam"] = json_io::to_json(cert.ccm.gam);
  j["active_g"] = index_list(cert.ccm.sets.active_g);
  j["zero_x"] = index_list(cert.ccm.sets.zero_x);
  j["nonzero_x"] = index_list(cert.ccm.sets.nonzero_x);
  j["ccs_pair"] = cert.ccs_pair ? json_io::to_json(*cert.ccs_pair) : ordered_json(nullptr);
  j["ccam"] = std::string(to_string(cert.ccam_ok));
  j["ccpam"] = std::string(to_string(cert.ccpam_ok));
  const auto& d = cert.diagnostics;
  ordered_json cond;
  cond["a"] = std::string(to_string(d.cond_a));
  cond["b"] = std::string(to_string(d.cond_b));
  cond["c"] = std::string(to_string(d.cond_c));
  cond["d"] = std::string(to_string(d.cond_d));
  cond["e"] = std::string(to_string(d.cond_e));
  j["conditions"] = cond;
  j["sequence_length"] = d.pi.size();
  j["final_distance"] = d.final_distance;
  j["final_residual"] = d.final_residual;
  ordered_json comps = ordered_json::array();
  for (const auto& c : d.components) {
    if (!c.triggered && c.verdict == Verdict::Pass) continue;
    ordered_json cj;
    cj["block"] = std::string(to_string(c.block));
    cj["index"] = c.index;
    cj["min_normalized"] = c.min_normalized;
    cj["worst_product"] = c.worst_product;
    cj["triggered"] = c.triggered;
    cj["verdict"] = std::string(to_string(c.verdict));
    comps.push_back(cj);
  }
  j["components"] = comps;
  return j;
}

ordered_json to_json(const OracleResult& oracle, bool include_supports) {
  ordered_json j;
  j["best_f"] = oracle.best_f;
  j["best_x"] = json_io::to_json(oracle.best_x);
  j["best_support"] = index_list(oracle.best_support);
  j["found_feasible"] = oracle.found_feasible;
  j["enumerated"] = oracle.enumerated;
  if (include_supports) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : oracle.per_support) {
      ordered_json sj;
      sj["support"] = index_list(s.support);
      sj["objective"] = s.objective;
      sj["infeasibility"] = s.infeasibility;
      sj["feasible"] = s.feasible;
      sj["failed_starts"] = s.failed_starts;
      sj["x"] = json_io::to_json(s.x);
      arr.push_back(sj);
    }
    j["per_support"] = arr;
  }
  return j;
}

ordered_json to_json(const SalmConfig& cfg) {
  ordered_json j;
  j["rho0"] = cfg.rho0;
  j["tau"] = cfg.tau;
  j["sigma"] = cfg.sigma;
  j["eps0"] = cfg.eps.eps0;
  j["eps_theta"] = cfg.eps.theta;
  j["eps_min"] = cfg.eps.eps_min;
  j["tol_feas"] = cfg.tol_feas;
  j["tol_opt"] = cfg.tol_opt;
  j["tol_active"] = cfg.tol_active;
  j["max_outer"] = cfg.max_outer;
  j["rho_max"] = cfg.rho_max;
  ordered_json b;
  b["lam_max"] = cfg.bounds.lam_max;
  b["mu_min"] = cfg.bounds.mu_min;
  b["mu_max"] = cfg.bounds.mu_max;
  b["gam_min"] = cfg.bounds.gam_min;
  b["gam_max"] = cfg.bounds.gam_max;
  b["delta_max"] = cfg.bounds.delta_max;
  b["eta_max"] = cfg.bounds.eta_max;
  j["safeguards"] = b;
  ordered_json in;
  in["max_iters"] = cfg.inner.max_iters;
  in["ls_shrink"] = cfg.inner.ls_shrink;
  in["ls_c1"] = cfg.inner.ls_c1;
  in["bb_min"] = cfg.inner.bb_min;
  in["bb_max"] = cfg.inner.bb_max;
  in["nonmonotone_window"] = cfg.inner.nonmonotone_window;
  in["trust_radius"] = cfg.inner.trust_radius;
  j["inner"] = in;
  return j;
}

namespace {
// The record tag goes first so each line is identifiable at a glance.
ordered_json tagged(const char* kind, const ordered_json& fields) {
  ordered_json j;
  j["record"] = kind;
  for (const auto& [key, value] : fields.items()) {
    if (key != "record") j[key] = value;
  }
  return j;
}
}  // namespace

TraceWriter::TraceWriter(ordered_json header) : header_(tagged("header", header)) {}

void TraceWriter::add_rows(const RunTrace& trace, int run) {
  for (const auto& row : trace.rows) {
    ordered_json j = to_json(row);
    j["run"] = run;
    lines_.push_back(json_io::dump(j, -1));
  }
}

void TraceWriter::set_footer(ordered_json footer) {
  footer_ = tagged("footer", footer);
}

std::string TraceWriter::body() const {
  std::string out;
  for (const auto& l : lines_) out += l + "\n";
  out += json_io::dump(footer_, -1) + "\n";
  return out;
}

std::string TraceWriter::render() const { return json_io::dump(header_, -1) + "\n" + body(); }

void TraceWriter::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot write trace");
  out << render();
}

TraceFile parse_trace(const std::string& text) {
  TraceFile t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const std::string kind = j.at("record").get<std::string>();
    if (kind == "header") {
      t.header = std::move(j);
    } else if (kind == "iter") {
      t.rows.push_back(record_from_json(j));
      t.row_runs.push_back(j.value("run", 0));
    } else if (kind == "footer") {
      t.footer = std::move(j);
    } else {
      throw std::invalid_argument("trace: unknown record kind '" + kind + "'");
    }
  }
  return t;
}

TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot read trace");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

}  // namespace ccop
