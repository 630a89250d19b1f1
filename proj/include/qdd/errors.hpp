#pragma once
#include <stdexcept>
#include <string>

namespace qdd {

// error families; the CLI maps them onto exit codes (config 2, solver 3, line search 4)
struct geometry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
  int line;  // 0 = not tied to a config line
  explicit config_error(const std::string& msg, int line_no = 0)
      : std::runtime_error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
        line(line_no) {}
};

struct linear_solver_error : std::runtime_error {
  double residual;
  explicit linear_solver_error(const std::string& msg, double res = 0.0)
      : std::runtime_error(msg + " (residual " + std::to_string(res) + ")"), residual(res) {}
};

struct positivity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct nonconvergence_error : std::runtime_error {
  double residual;
  int iterations;
  nonconvergence_error(const std::string& msg, double res, int iters)
      : std::runtime_error(msg + " (residual " + std::to_string(res) + " after " +
                           std::to_string(iters) + " iterations)"),
        residual(res), iterations(iters) {}
};

struct line_search_error : std::runtime_error {
  double last_alpha;
  double last_cost;
  line_search_error(const std::string& msg, double alpha, double cost)
      : std::runtime_error(msg + " (last alpha " + std::to_string(alpha) + ", last cost " +
                           std::to_string(cost) + ")"),
        last_alpha(alpha), last_cost(cost) {}
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qdd
