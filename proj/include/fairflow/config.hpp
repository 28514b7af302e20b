#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fairflow/sim.hpp"

namespace fairflow {

/// Bad configuration text or setting. `line` is 0 when not tied to a file line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Sets one scenario field from a flat key path:
///
///   system.<field>       mu_star q_c q_max p_min p_max nu_max lambda1 lambda2
///                        theta_d T_d T_I dt
///   controller.<field>   p_grid_size nu_grid_size b1 b2 b3 objective margins
///   sim.<field>          name t_end seed initial_price initial_q initial_alpha
///                        initial_x (comma-separated) dropout_sensor_gain
///   classes.<i>.<field>  r1 r2                    (1-based)
///   profile.<i>.<field>  kind mean std breakpoints (t:mean pairs, comma-separated)
///
/// Class and profile indices must already exist. No cross-field validation.
void apply_setting(Scenario& scn, std::string_view key, std::string_view value);

/// Sectioned `key = value` text: [system], [classes] (repeated, one class
/// each), [profile.<i>], [controller], [sim]. `#` and `;` start comments.
/// Missing keys keep their defaults; every class needs a profile section.
/// The result is validated; errors name the source, line and key path.
Scenario parse_config_text(std::string_view text, std::string_view source = "<config>");
Scenario parse_config(const std::filesystem::path& path);

/// Config text that parses back to `scn` at full precision (the policy is
/// chosen per run and is not part of a config).
std::string format_config(const Scenario& scn);

}  // namespace fairflow
