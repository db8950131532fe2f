#include "collapse/presets.hpp"

#include <stdexcept>

namespace collapse {

const std::vector<PhysicalPreset>& physical_presets()
{
    // 1e16 cm^3 g^-2 s^-1 equals 1e16 m^3 kg^-2 s^-1.
    static const std::vector<PhysicalPreset> presets = {
        {"grw-csl", KernelKind::csl, 1e-7, 1e16, 0.0, "CSL at the GRW point, sigma = 1e-7 m"},
        {"dp", KernelKind::dp, 1e-14, 0.0, 2.0, "DP kernel, nuclear-scale sigma = 1e-14 m, kappa = 2"},
    };
    return presets;
}

const PhysicalPreset& find_preset(const std::string& name)
{
    for (const auto& p : physical_presets())
        if (p.name == name)
            return p;
    throw std::invalid_argument("unknown preset '" + name + "'");
}

LatticeParameters to_lattice(const PhysicalPreset& preset, const LatticeUnits& units)
{
    if (!(units.length > 0.0) || !(units.mass > 0.0))
        throw std::invalid_argument("lattice units must be positive");
    const double a = units.length, m0 = units.mass, hb = si::hbar;
    LatticeParameters p{};
    p.sigma = preset.sigma / a;
    // G [m^3 kg^-1 s^-2] in units a^3 / (m0 tau^2)
    p.G = si::G * m0 * m0 * m0 * a / (hb * hb);
    // gamma / hbar^2 [m^3 kg^-2 s^-1] in units a^3 / (m0^2 tau)
    p.gamma = preset.kernel == KernelKind::csl ? preset.gamma_over_hbar2 * m0 * m0 * m0 / (hb * a) : 0.0;
    p.kappa = preset.kappa;
    return p;
}

}  // namespace collapse
