#pragma once

#include <stdexcept>
#include <string>

namespace batchclear {

// Base class for all domain errors thrown by this library.  Conditions that
// are part of a normal result (validation reports, non-convergence, absence
// of a rational solution) are returned as values, not thrown.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_prices : error {
    using error::error;
};
struct trade_shape_error : error {
    using error::error;
};
struct singular_spot : error {
    using error::error;
};
struct non_concave_function : error {
    using error::error;
};
struct degenerate_spec : error {
    using error::error;
};
struct invalid_fee : error {
    using error::error;
};
struct unbounded_density : error {
    using error::error;
};
struct out_of_range : error {
    using error::error;
};
struct inconsistent_densities : error {
    using error::error;
};
struct infeasible_state : error {
    using error::error;
};
struct unsupported_participant : error {
    using error::error;
};
struct wrong_arity : error {
    using error::error;
};
struct invalid_alpha : error {
    using error::error;
};
struct incomplete_solution : error {
    using error::error;
};
struct unknown_cfmm : error {
    using error::error;
};
struct parse_error : error {
    using error::error;
};

}  // namespace batchclear
