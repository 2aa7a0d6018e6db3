// Convergence studies over nested structured meshes, with CSV and Markdown
// report emission mirroring the layout of the reference tables.

#pragma once

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mhdwg/errors.hpp"
#include "mhdwg/solver.hpp"

namespace mhdwg {

struct ConvergenceRow {
  int n = 0;
  ErrorReport err;
  int iterations = 0;
};

struct ConvergenceTable {
  int example = 1;
  int k = 1;
  PhysicalParams params;
  std::string timestamp, commit = "unknown";
  std::vector<ConvergenceRow> rows;
};

// observed order log2(e_coarse / e_fine) between consecutive rows
inline std::vector<double> observed_orders(const std::vector<double>& errors) {
  std::vector<double> ord;
  for (std::size_t i = 1; i < errors.size(); ++i)
    ord.push_back(std::log2(errors[i - 1] / errors[i]));
  return ord;
}

namespace detail {

inline std::string now_string() {
  std::time_t t = std::time(nullptr);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
  return buf;
}

inline const char* const kColumns[] = {"u_l2",      "u_wgrad",   "u_bgrad",  "B_wcurl",
                                       "B_bcurl",   "B_l2",      "p_l2",     "p_wgrad_h",
                                       "r_l2_adj",  "r_wgrad_h", "r_l2_raw", "div_u",
                                       "div_B",     "jump_u",    "jump_B"};

inline std::vector<double> row_values(const ErrorReport& e) {
  return {e.u_l2,      e.u_wgrad,   e.u_bgrad,  e.B_wcurl, e.B_bcurl,
          e.B_l2,      e.p_l2,      e.p_wgrad_h, e.r_l2_adj, e.r_wgrad_h,
          e.r_l2_raw,  e.div_u,     e.div_B,    e.jump_u,  e.jump_B};
}

inline void set_row_values(ErrorReport& e, const std::vector<double>& v) {
  e.u_l2 = v[0];
  e.u_wgrad = v[1];
  e.u_bgrad = v[2];
  e.B_wcurl = v[3];
  e.B_bcurl = v[4];
  e.B_l2 = v[5];
  e.p_l2 = v[6];
  e.p_wgrad_h = v[7];
  e.r_l2_adj = v[8];
  e.r_wgrad_h = v[9];
  e.r_l2_raw = v[10];
  e.div_u = v[11];
  e.div_B = v[12];
  e.jump_u = v[13];
  e.jump_B = v[14];
}

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

inline std::string ord(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

// Runs the solver across the mesh list (each entry typically twice the
// previous) and gathers the error reports.
inline ConvergenceTable convergence_study(int example, int k, const std::vector<int>& meshes,
                                          SolverConfig base = SolverConfig{}) {
  ConvergenceTable table;
  table.example = example;
  table.k = k;
  base.params.k = k;
  base.example = example;
  table.params = base.params;
  table.timestamp = detail::now_string();
  ManufacturedCase mc = manufactured_case(example, base.params);
  for (int n : meshes) {
    SolverConfig cfg = base;
    cfg.n = n;
    MHDRun run = run_mhd(cfg);
    ConvergenceRow row;
    row.n = n;
    row.iterations = run.fields.iterations;
    row.err = compute_errors(*run.ctx, run.fields, mc);
    table.rows.push_back(row);
  }
  return table;
}

inline void emit_csv(const ConvergenceTable& t, std::ostream& os) {
  os << "# example=" << t.example << " k=" << t.k << " Ha=" << t.params.Ha << " N=" << t.params.N
     << " Rm=" << t.params.Rm << "\n";
  os << "# timestamp=" << t.timestamp << " commit=" << t.commit << "\n";
  os << "n,iterations";
  for (const char* c : detail::kColumns) os << "," << c;
  os << "\n";
  for (const auto& r : t.rows) {
    os << r.n << "," << r.iterations;
    for (double v : detail::row_values(r.err)) os << "," << detail::sci(v);
    os << "\n";
  }
}

inline ConvergenceTable parse_csv(std::istream& is) {
  ConvergenceTable t;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string kv;
      while (ls >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "example") t.example = std::stoi(val);
        if (key == "k") t.k = std::stoi(val);
        if (key == "Ha") t.params.Ha = std::stod(val);
        if (key == "N") t.params.N = std::stod(val);
        if (key == "Rm") t.params.Rm = std::stod(val);
        if (key == "timestamp") t.timestamp = val;
        if (key == "commit") t.commit = val;
      }
      continue;
    }
    if (line.rfind("n,", 0) == 0) continue;  // header
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) continue;
    ConvergenceRow row;
    row.n = std::stoi(cells[0]);
    row.iterations = std::stoi(cells[1]);
    std::vector<double> vals;
    for (std::size_t i = 2; i < cells.size(); ++i) vals.push_back(std::stod(cells[i]));
    vals.resize(15, 0.0);
    detail::set_row_values(row.err, vals);
    t.rows.push_back(row);
  }
  t.params.k = t.k;
  return t;
}

// Markdown report in the layout of the reference tables: three sub-tables
// (velocity, magnetic field, pressures) with error/order column pairs.
inline void emit_markdown(const ConvergenceTable& t, std::ostream& os) {
  auto col = [&](auto getter) {
    std::vector<double> v;
    for (const auto& r : t.rows) v.push_back(getter(r.err));
    return v;
  };
  auto print_block = [&](const std::string& title, const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& cols,
                         const std::vector<double>* extra, const std::string& extra_name) {
    os << "\n### " << title << "\n\n";
    os << "| mesh |";
    for (const auto& nme : names) os << " " << nme << " | order |";
    if (extra) os << " " << extra_name << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < names.size(); ++i) os << "---|---|";
    if (extra) os << "---|";
    os << "\n";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      os << "| " << t.rows[i].n << "x" << t.rows[i].n << " |";
      for (const auto& c : cols) {
        os << " " << detail::sci(c[i]) << " | ";
        if (i == 0)
          os << "- |";
        else
          os << detail::ord(std::log2(c[i - 1] / c[i])) << " |";
      }
      if (extra) os << " " << detail::sci((*extra)[i]) << " |";
      os << "\n";
    }
  };

  os << "## Convergence history: example " << t.example << ", k = " << t.k
     << " (Ha=" << t.params.Ha << ", N=" << t.params.N << ", Rm=" << t.params.Rm << ")\n";
  os << "Generated " << t.timestamp << ", commit " << t.commit << "\n";

  auto divu = col([](const ErrorReport& e) { return e.div_u; });
  auto divB = col([](const ErrorReport& e) { return e.div_B; });
  print_block("velocity",
              {"u L2 (rel)", "weak-grad (rel)", "broken-grad (rel)"},
              {col([](const ErrorReport& e) { return e.u_l2; }),
               col([](const ErrorReport& e) { return e.u_wgrad; }),
               col([](const ErrorReport& e) { return e.u_bgrad; })},
              &divu, "div Uh");
  print_block("magnetic field",
              {"B L2 (rel)", "weak-curl (rel)", "broken-curl (rel)"},
              {col([](const ErrorReport& e) { return e.B_l2; }),
               col([](const ErrorReport& e) { return e.B_wcurl; }),
               col([](const ErrorReport& e) { return e.B_bcurl; })},
              &divB, "div Bh");
  print_block("pressure and magnetic pseudo-pressure",
              {"p L2 (rel)", "h grad-p (rel)", "r L2 adj (rel)", "h grad-r (rel)"},
              {col([](const ErrorReport& e) { return e.p_l2; }),
               col([](const ErrorReport& e) { return e.p_wgrad_h; }),
               col([](const ErrorReport& e) { return e.r_l2_adj; }),
               col([](const ErrorReport& e) { return e.r_wgrad_h; })},
              nullptr, "");
}

inline void emit_report(const ConvergenceTable& t, const std::string& format,
                        const std::string& path) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!path.empty() && path != "-") {
    file.open(path);
    if (!file) throw std::runtime_error("emit_report: cannot open " + path);
    os = &file;
  }
  if (format == "csv")
    emit_csv(t, *os);
  else if (format == "md")
    emit_markdown(t, *os);
  else
    throw std::invalid_argument("emit_report: format must be csv or md");
}

}  // namespace mhdwg
