#pragma once

#include "shapekern/socp/admm.hpp"
#include "shapekern/socp/cones.hpp"
#include "shapekern/socp/ipm.hpp"
#include "shapekern/socp/program.hpp"

namespace shapekern::socp {

/// Solves the conic program with the backend selected in `opts`.
inline SolveReport solve(const ConicProgram &prog, const SolverOptions &opts = {}) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    Method m = opts.method;
    if (m == Method::Auto) m = prog.num_vars() <= opts.interior_point_max_vars ? Method::InteriorPoint : Method::OperatorSplitting;
    if (m == Method::InteriorPoint) return solve_interior_point(prog, opts);
    return solve_admm(prog, opts);
}

/// Overload matching the plain (tol, max_iter) call form; uses operator splitting.
inline SolveReport solve(const ConicProgram &prog, double tol, int max_iter) {
    SolverOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    opts.method = Method::OperatorSplitting;
    return solve(prog, opts);
}

}  // namespace shapekern::socp
