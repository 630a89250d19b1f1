#pragma once
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qdd/operators.hpp"
#include "qdd/optimizer.hpp"
#include "qdd/system.hpp"

namespace qdd {

// shortest round-trip decimal form, so reruns byte-match
inline std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

struct File {
  std::FILE* f = nullptr;
  explicit File(const std::string& path) : f(std::fopen(path.c_str(), "w")) {
    if (!f) throw io_error("cannot open " + path + " for writing");
  }
  ~File() {
    if (f) std::fclose(f);
  }
  File(const File&) = delete;
  File& operator=(const File&) = delete;
};

inline void make_dirs(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory " + dir + ": " + ec.message());
}

}  // namespace detail

inline void write_field_csv(const std::string& path, const ScalarField& f) {
  const Mesh& m = *f.mesh;
  detail::File out(path);
  std::fprintf(out.f, "x,y,value\n");
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i)
      std::fprintf(out.f, "%s,%s,%s\n", g17(m.x(i)).c_str(),
                   g17(m.y(j)).c_str(), g17(f.v[m.idx(i, j)]).c_str());
}

// value column of an x,y,value file written in the same row-major order
inline ScalarField read_field_csv(const std::string& path,
                                  std::shared_ptr<const Mesh> mesh) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  ScalarField f(mesh, 0.0);
  std::string line;
  int lineno = 0, n = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line.rfind("x,y", 0) == 0)) continue;
    double x, y, v;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &v) != 3)
      throw io_error(path + ":" + std::to_string(lineno) + ": expected x,y,value");
    if (n >= f.size())
      throw io_error(path + ": more rows than grid nodes");
    f.v[n++] = v;
  }
  if (n != f.size())
    throw io_error(path + ": " + std::to_string(n) + " rows for " +
                   std::to_string(f.size()) + " grid nodes");
  return f;
}

inline void write_trace_csv(const std::string& path,
                            const std::vector<TraceRow>& rows) {
  detail::File out(path);
  std::fprintf(out.f, "k,J,grad_norm,alpha,current\n");
  for (const TraceRow& r : rows)
    std::fprintf(out.f, "%d,%s,%s,%s,%s\n", r.k, g17(r.cost).c_str(),
                 g17(r.grad_norm).c_str(), g17(r.alpha).c_str(),
                 g17(r.current).c_str());
}

inline void write_summary(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string parent = std::filesystem::path(path).parent_path().string();
  if (!parent.empty()) detail::make_dirs(parent);
  detail::File out(path);
  for (const auto& [k, v] : kv) std::fprintf(out.f, "%s: %s\n", k.c_str(), v.c_str());
}

// field dumps for offline plotting: the three unknowns, the densities, and
// the current-density magnitude n|grad S|
inline void emit_results(const StateTriple& u, const ScalarField& C,
                         const std::string& out_dir) {
  std::string dir = out_dir + "/fields";
  detail::make_dirs(dir);
  ScalarField n = squared(u.rho);
  ScalarField drive = nodal_gradient_magnitude(u.S);
  for (int i = 0; i < n.size(); ++i) drive.v[i] *= n.v[i];
  write_field_csv(dir + "/rho.csv", u.rho);
  write_field_csv(dir + "/V.csv", u.V);
  write_field_csv(dir + "/S.csv", u.S);
  write_field_csv(dir + "/n.csv", n);
  write_field_csv(dir + "/C.csv", C);
  write_field_csv(dir + "/current_density.csv", drive);
}

inline void emit_results(const OptimizationTrace& tr, const std::string& out_dir) {
  detail::make_dirs(out_dir);
  write_trace_csv(out_dir + "/trace.csv", tr.rows);
  emit_results(tr.state, tr.C_opt, out_dir);
}

}  // namespace qdd
