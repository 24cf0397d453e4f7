#include "wavekernel/triangle_field.hpp"

#include "wavekernel/errors.hpp"

#include <algorithm>

namespace wavekernel {

TriangleField::TriangleField(std::size_t m, std::size_t n)
    : m_(m), n_(n), storage_((m + 1) * (m + 2) / 2 * n * n, cplx(0.0)) {
    if (m == 0 || n == 0) throw InputError("triangle field: lattice size and dimension must be positive");
}

double max_distance(const TriangleField& a, const TriangleField& b) {
    if (a.size() != b.size() || a.dimension() != b.dimension())
        throw InputError("triangle field: shape mismatch");
    const std::size_t n = a.dimension();
    const std::size_t nn = n * n;
    std::vector<cplx> diff(nn);
    double worst = 0.0;
    for (std::size_t node = 0; node < a.node_count(); ++node) {
        for (std::size_t k = 0; k < nn; ++k) diff[k] = a.storage_[node * nn + k] - b.storage_[node * nn + k];
        worst = std::max(worst, detail::block_norm(diff.data(), n));
    }
    return worst;
}

}  // namespace wavekernel
