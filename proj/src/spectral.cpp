#include "collapse/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace collapse::spectral {

namespace {

// In-place plans keyed by shape and direction. Planning is not thread safe
// in FFTW, execution on new arrays is.
class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(const std::vector<int>& dims, int sign)
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(dims, sign);
        auto it = plans_.find(key);
        if (it != plans_.end())
            return it->second;
        std::size_t n = 1;
        for (int d : dims)
            n *= static_cast<std::size_t>(d);
        fftw_complex* buf = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (!plan)
            throw std::runtime_error("FFTW planning failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

void execute(const LatticeGrid& grid, ComplexField& f, int sign)
{
    if (static_cast<std::size_t>(f.size()) != grid.size())
        throw std::invalid_argument("field size does not match lattice");
    fftw_plan plan = cache().get(grid.dims(), sign);
    auto* data = reinterpret_cast<fftw_complex*>(f.data());
    fftw_execute_dft(plan, data, data);
}

}  // namespace

ComplexField forward(const LatticeGrid& grid, const SiteField& f)
{
    return forward(grid, ComplexField(f.cast<std::complex<double>>()));
}

ComplexField forward(const LatticeGrid& grid, ComplexField f)
{
    execute(grid, f, FFTW_FORWARD);
    return f;
}

ComplexField inverse(const LatticeGrid& grid, ComplexField f)
{
    execute(grid, f, FFTW_BACKWARD);
    f /= static_cast<double>(grid.size());
    return f;
}

SiteField inverse_real(const LatticeGrid& grid, ComplexField f)
{
    return inverse(grid, std::move(f)).real();
}

SiteField apply_multiplier(const LatticeGrid& grid, const SiteField& f, const std::vector<double>& mult)
{
    if (mult.size() != grid.size())
        throw std::invalid_argument("multiplier size does not match lattice");
    ComplexField F = forward(grid, f);
    for (Eigen::Index k = 0; k < F.size(); ++k)
        F[k] *= mult[static_cast<std::size_t>(k)];
    return inverse_real(grid, std::move(F));
}

double bilinear(const LatticeGrid& grid, const SiteField& f, const SiteField& g, const std::vector<double>& mult)
{
    ComplexField F = forward(grid, f);
    ComplexField Gk = forward(grid, g);
    double s = 0.0;
    for (Eigen::Index k = 0; k < F.size(); ++k)
        s += mult[static_cast<std::size_t>(k)] * (std::conj(F[k]) * Gk[k]).real();
    return s * grid.cell_volume() / static_cast<double>(grid.size());
}

ComplexField gradient(const LatticeGrid& grid, const SiteField& f, int axis)
{
    ComplexField F = forward(grid, f);
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t s = 0; s < grid.size(); ++s) {
        int n = grid.coords(s)[axis];
        F[static_cast<Eigen::Index>(s)] *= I * grid.wavenumber(axis, n);
    }
    return inverse(grid, std::move(F));
}

SiteField correlation(const LatticeGrid& grid, const SiteField& f, const SiteField& g)
{
    ComplexField F = forward(grid, f);
    ComplexField Gk = forward(grid, g);
    ComplexField H = F.conjugate().cwiseProduct(Gk);
    return inverse_real(grid, std::move(H)) * grid.cell_volume();
}

SiteField convolution(const LatticeGrid& grid, const SiteField& f, const SiteField& g)
{
    ComplexField F = forward(grid, f);
    ComplexField Gk = forward(grid, g);
    ComplexField H = F.cwiseProduct(Gk);
    return inverse_real(grid, std::move(H)) * grid.cell_volume();
}

SiteField translate(const LatticeGrid& grid, const SiteField& f, std::size_t site)
{
    if (static_cast<std::size_t>(f.size()) != grid.size())
        throw std::invalid_argument("field size does not match lattice");
    SiteField out(f.size());
    auto shift = grid.coords(site);
    for (std::size_t r = 0; r < grid.size(); ++r)
        out[static_cast<Eigen::Index>(grid.shifted(r, shift))] = f[static_cast<Eigen::Index>(r)];
    return out;
}

}  // namespace collapse::spectral
