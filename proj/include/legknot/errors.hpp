#pragma once

#include <stdexcept>
#include <string>

namespace legknot {

enum class errc {
    all_coefficients_zero,
    singular_system,
    tangential_crossing,
    seed_grid_too_coarse,
    z_tie,
    no_room_for_circle,
    self_intersection,
    degree_cap_exceeded,
    malformed_code,
    cusp_ill_conditioned,
    equal_slopes,
    not_in_right_half_sphere,
    not_legendrian,
    degree_too_small,
    at_infinity,
    no_convergence,
    not_escaped_in_grid,
    invalid_input,
};

inline const char* errc_name(errc e) {
    switch (e) {
    case errc::all_coefficients_zero: return "AllCoefficientsZero";
    case errc::singular_system: return "SingularSystem";
    case errc::tangential_crossing: return "TangentialCrossing";
    case errc::seed_grid_too_coarse: return "SeedGridTooCoarse";
    case errc::z_tie: return "ZTie";
    case errc::no_room_for_circle: return "NoRoomForCircle";
    case errc::self_intersection: return "SelfIntersection";
    case errc::degree_cap_exceeded: return "DegreeCapExceeded";
    case errc::malformed_code: return "MalformedCode";
    case errc::cusp_ill_conditioned: return "CuspIllConditioned";
    case errc::equal_slopes: return "EqualSlopes";
    case errc::not_in_right_half_sphere: return "NotInRightHalfSphere";
    case errc::not_legendrian: return "NotLegendrian";
    case errc::degree_too_small: return "DegreeTooSmall";
    case errc::at_infinity: return "AtInfinity";
    case errc::no_convergence: return "NoConvergence";
    case errc::not_escaped_in_grid: return "NotEscapedInGrid";
    case errc::invalid_input: return "InvalidInput";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace legknot
