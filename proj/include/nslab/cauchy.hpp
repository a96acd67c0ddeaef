#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nslab/domain.hpp"
#include "nslab/fields.hpp"
#include "nslab/manufactured.hpp"

namespace nslab {

/// Data tiers: boundary traces only (continuation), + interior snapshot and
/// first time-derivative traces, + second time-derivative traces.
enum class DataTier { D, D1, D2 };

std::string to_string(DataTier t);
DataTier tier_from_string(const std::string& s);

/// One quadrature sample point of the observed boundary.
struct GammaEntry {
    FaceId face;
    std::size_t node;
    double weight;  // tangential quadrature weight
};

/// Trace values on the observed boundary over time.
/// Layout: value(entry, slice, comp) at ((e * slices) + k) * ncomp + c.
struct TraceField {
    int ncomp = 1;
    std::vector<double> values;
};

struct CauchyDataset {
    DataTier tier = DataTier::D;
    double sigma = 0;
    std::uint64_t seed = 0;

    std::vector<GammaEntry> entries;
    int slices = 0;
    std::map<std::string, TraceField> traces;
    Field snapshot_v;       // tier >= D1
    bool has_snapshot = false;

    // data magnitudes of the (possibly noisy) dataset per tier
    double mag_D = 0, mag_D1 = 0, mag_D2 = 0;
    // same functionals applied to the injected perturbation alone
    double noise_D = 0, noise_D1 = 0, noise_D2 = 0;
    // a-priori bounds computed from the exact solution
    double bound_M = 0, bound_M1 = 0, bound_M2 = 0, bound_m1 = 0;

    bool same_values(const CauchyDataset& o) const;
    std::uint64_t digest() const;
};

/// Builds tiered boundary data (plus snapshot) from exact closures, injects
/// seeded Gaussian noise of relative size sigma per trace, and computes the
/// data magnitudes and a-priori bounds.
CauchyDataset generate_cauchy_data(const ManufacturedSolution& sol,
                                   const CoefficientFields& coeffs, const DomainSpec& dom,
                                   DataTier tier, double sigma, std::uint64_t seed,
                                   const Forcing* forcing = nullptr);

/// Restriction of a cylinder field to the observed boundary (per entry/slice).
TraceField extract_trace(const SpaceTimeField& f, const DomainSpec& dom,
                         const std::vector<GammaEntry>& entries);
/// One-sided second-order outward-normal derivative on the observed boundary.
TraceField extract_normal_derivative(const SpaceTimeField& f, const DomainSpec& dom,
                                     const std::vector<GammaEntry>& entries);

std::vector<GammaEntry> gamma_entries(const DomainSpec& dom);

/// CSV-per-trace directory plus a manifest. Deterministic bytes.
void save_dataset(const CauchyDataset& ds, const DomainSpec& dom, const std::string& dir);

nlohmann::json dataset_manifest(const CauchyDataset& ds);

/// Deterministic standard normal from a seeded engine (Box-Muller).
double gaussian_sample(std::uint64_t& state);

}  // namespace nslab
