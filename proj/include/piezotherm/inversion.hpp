#pragma once

// All-at-once reconstruction: projected Landweber descent on
// 1/2 w_A |A(f,l)|^2 + 1/2 |C(f,l) - y|^2 + alpha/2 |l - l0|^2
// jointly in the unknown parameters and the state.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "piezotherm/errors.hpp"
#include "piezotherm/model_operator.hpp"

namespace piezotherm {

enum class ParamMode { fixed, constant, field };

const char* to_string(ParamMode mode);
ParamMode param_mode_from_string(const std::string& s);

struct InversionConfig {
    // p1 can only be fixed or constant
    ParamMode p1 = ParamMode::fixed;
    ParamMode p2 = ParamMode::constant;
    ParamMode p3 = ParamMode::constant;
    double step = 1.0;  ///< fraction of the stable Landweber step, in (0, 2)
    std::size_t max_iter = 500;
    double tikhonov = 0.0;
    double tau_dp = 1.5;
    /// Stopping level relative to |y| when delta = 0.
    double relative_tolerance = 1.0e-4;
    double model_weight = 1.0;
    std::size_t basis_size = 24;
    std::uint64_t basis_seed = 1;
    std::size_t max_rejections = 10;

    void validate() const;
    nlohmann::json to_json() const;
};

struct IterationRecord {
    std::size_t iteration = 0;
    double objective = 0.0;
    double misfit = 0.0;
    double model_residual = 0.0;
    double step_scale = 1.0;
    std::vector<double> params;  ///< p1, p2, p3 (mean value for fields)
    std::vector<double> param_errors;  ///< relative; empty without ground truth
};

struct InversionReport {
    std::vector<IterationRecord> history;
    std::string stop_reason;
    double delta = 0.0;
    double target_misfit = 0.0;
    double data_norm = 0.0;
    std::size_t rejections = 0;
    MaterialParams estimate;
    std::vector<double> final_errors;
    nlohmann::json config;

    nlohmann::json to_json() const;
};

class InversionDiverged : public Error {
public:
    InversionDiverged(const std::string& what, InversionReport report)
        : Error(what), report_(std::move(report)) {}
    const InversionReport& report() const noexcept { return report_; }

private:
    InversionReport report_;
};

/// model.params is the initial guess. The data must be a bulk trace on the
/// model time grid; its delta field is the noise level. truth, when given,
/// is used only for the reported errors.
InversionReport invert_all_at_once(const ObservationTrace& y_delta, const InitialData& init, const Model& model,
                                   const InversionConfig& config,
                                   const std::optional<MaterialParams>& truth = std::nullopt);

}  // namespace piezotherm
