#pragma once

// JSON experiment description: parsing with field-level error messages,
// defaults, and construction of the model objects it describes.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "piezotherm/errors.hpp"
#include "piezotherm/inversion.hpp"

namespace piezotherm {

/// Malformed configuration; the message names the offending field.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct ExperimentConfig {
    double length = 1.0e-2;
    std::size_t n_elem = 128;
    double end_time = 1.0e-3;
    std::size_t n_step = 512;

    double epsilon = 0.0;
    double mollify = 0.0;

    /// Raw sections that are turned into objects by the builders below.
    nlohmann::json materials;
    nlohmann::json coefficients;
    nlohmann::json excitation;
    nlohmann::json initial;

    TraceKind observation_kind = TraceKind::bulk;
    double gamma = 0.05;  ///< window width relative to h
    double delta = 0.0;   ///< noise level relative to the clean trace norm
    std::uint64_t seed = 1;
    bool lower_half = false;

    InversionConfig inversion;
    nlohmann::json truth;  ///< material parameters generating synthetic data
    std::string data_file;

    std::vector<double> eps_list{1.0e-1, 1.0e-2, 1.0e-3, 1.0e-4};
    std::size_t refinement_levels = 3;
    std::size_t derivative_samples = 20;

    std::string output_dir = "out";

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
    /// Fully resolved document, defaults included.
    nlohmann::json to_json() const;

    SpatialGrid grid() const;
    TimeGrid time() const;
    /// allow_zero_excitation lets forward runs use phi_e = 0.
    Model model(bool allow_zero_excitation = false) const;
    MaterialParams params(const nlohmann::json& section, const SpatialGrid& grid, const TimeGrid& time) const;
    InitialData initial_data() const;
    bool excitation_is_zero() const;
};

}  // namespace piezotherm
