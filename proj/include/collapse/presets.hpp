#pragma once

#include <string>
#include <vector>

#include "collapse/kernels.hpp"

namespace collapse {

namespace si {
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double G = 6.67430e-11;         // m^3 kg^-1 s^-2
inline constexpr double amu = 1.66053906660e-27; // kg
}  // namespace si

/// A parameter point in SI units. For CSL, gamma is the kernel strength
/// including hbar^2, i.e. gamma / hbar^2 is given in m^3 kg^-2 s^-1.
struct PhysicalPreset {
    std::string name;
    KernelKind kernel;
    double sigma;              // m
    double gamma_over_hbar2;   // m^3 kg^-2 s^-1, CSL only
    double kappa;              // DP only
    std::string description;
};

const std::vector<PhysicalPreset>& physical_presets();
const PhysicalPreset& find_preset(const std::string& name);

/// Lattice units: length a, mass m0, time m0 a^2 / hbar, hbar = 1.
struct LatticeUnits {
    double length = 1e-7;    // m
    double mass = si::amu;   // kg

    double time() const { return mass * length * length / si::hbar; }
};

struct LatticeParameters {
    double sigma;
    double gamma;
    double kappa;
    double G;
};

LatticeParameters to_lattice(const PhysicalPreset& preset, const LatticeUnits& units);

}  // namespace collapse
