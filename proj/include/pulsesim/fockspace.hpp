#ifndef PULSESIM_FOCKSPACE_HPP
#define PULSESIM_FOCKSPACE_HPP

// Truncated bosonic operator algebra on a composite Hilbert space:
// site-local ladder/number operators, tensor-product embedding,
// excitation-number sectors and computational-subspace projectors.

#include <complex>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pulsesim {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

namespace fockspace {

/// Levels per site of a composite space. Composite indices are row-major
/// over sites with site 0 slowest-varying; every module shares this
/// convention so matrices compare entrywise across modules.
struct HilbertLayout {
    std::vector<int> local_dims;

    HilbertLayout() = default;
    HilbertLayout(std::initializer_list<int> dims) : local_dims(dims) { validate(); }
    explicit HilbertLayout(std::vector<int> dims) : local_dims(std::move(dims)) { validate(); }

    int site_count() const { return static_cast<int>(local_dims.size()); }

    long total_dim() const {
        long d = 1;
        for (int ld : local_dims) d *= ld;
        return d;
    }

    long index_of(std::span<const int> occupations) const {
        if (occupations.size() != local_dims.size())
            throw std::invalid_argument("occupation list length does not match site count");
        long idx = 0;
        for (std::size_t i = 0; i < local_dims.size(); ++i) {
            if (occupations[i] < 0 || occupations[i] >= local_dims[i])
                throw std::out_of_range("occupation exceeds local dimension at site " + std::to_string(i));
            idx = idx * local_dims[i] + occupations[i];
        }
        return idx;
    }

    std::vector<int> occupations_of(long index) const {
        std::vector<int> occ(local_dims.size());
        for (int i = site_count() - 1; i >= 0; --i) {
            occ[i] = static_cast<int>(index % local_dims[i]);
            index /= local_dims[i];
        }
        return occ;
    }

    bool operator==(const HilbertLayout& other) const { return local_dims == other.local_dims; }

  private:
    void validate() const {
        if (local_dims.empty())
            throw std::invalid_argument("layout needs at least one site");
        for (int d : local_dims)
            if (d < 2) throw std::invalid_argument("local dimensions must be >= 2");
    }
};

/// Dense operator tagged with the layout it acts on. Entries are
/// dimensionless or rad/ns; the caller tracks units.
struct FockOperator {
    HilbertLayout layout;
    Matrix matrix;

    FockOperator() = default;
    FockOperator(HilbertLayout l, Matrix m) : layout(std::move(l)), matrix(std::move(m)) {
        const long dim = layout.total_dim();
        if (matrix.rows() != dim || matrix.cols() != dim)
            throw std::invalid_argument("operator dimension does not match layout");
    }
};

/// Projector onto a subset of composite basis states, stored as the ordered
/// index list. As a matrix it is exactly idempotent and Hermitian.
struct SubspaceProjector {
    HilbertLayout layout;
    std::vector<long> basis_indices;

    SubspaceProjector() = default;
    SubspaceProjector(HilbertLayout l, std::vector<long> indices)
        : layout(std::move(l)), basis_indices(std::move(indices)) {
        const long dim = layout.total_dim();
        long prev = -1;
        for (long idx : basis_indices) {
            if (idx <= prev) throw std::invalid_argument("projector indices must be strictly increasing");
            if (idx < 0 || idx >= dim) throw std::invalid_argument("projector index out of range");
            prev = idx;
        }
    }

    long rank() const { return static_cast<long>(basis_indices.size()); }

    Matrix as_matrix() const {
        Matrix p = Matrix::Zero(layout.total_dim(), layout.total_dim());
        for (long idx : basis_indices) p(idx, idx) = 1.0;
        return p;
    }
};

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

namespace detail {

inline void check_site(const HilbertLayout& layout, int site) {
    if (site < 0 || site >= layout.site_count())
        throw std::out_of_range("site " + std::to_string(site) + " out of range for " +
                                std::to_string(layout.site_count()) + " sites");
}

// Embeds a local operator at `site`, identity elsewhere.
inline FockOperator embed_local(const HilbertLayout& layout, int site, const Matrix& local) {
    check_site(layout, site);
    Matrix acc = Matrix::Identity(1, 1);
    for (int i = 0; i < layout.site_count(); ++i) {
        if (i == site)
            acc = kron(acc, local);
        else
            acc = kron(acc, Matrix::Identity(layout.local_dims[i], layout.local_dims[i]));
    }
    return FockOperator(layout, std::move(acc));
}

}  // namespace detail

/// Truncated annihilation operator on `site`: entry (k-1, k) = sqrt(k).
inline FockOperator lowering_op(const HilbertLayout& layout, int site) {
    detail::check_site(layout, site);
    const int d = layout.local_dims[site];
    Matrix local = Matrix::Zero(d, d);
    for (int k = 1; k < d; ++k) local(k - 1, k) = std::sqrt(static_cast<double>(k));
    return detail::embed_local(layout, site, local);
}

/// Truncated creation operator on `site` (adjoint of lowering_op).
inline FockOperator raising_op(const HilbertLayout& layout, int site) {
    FockOperator low = lowering_op(layout, site);
    return FockOperator(low.layout, low.matrix.adjoint());
}

/// Number operator: local diagonal (0, 1, ..., d-1) on `site`.
inline FockOperator number_op(const HilbertLayout& layout, int site) {
    detail::check_site(layout, site);
    const int d = layout.local_dims[site];
    Matrix local = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) local(k, k) = static_cast<double>(k);
    return detail::embed_local(layout, site, local);
}

/// Diagonal operator counting total excitations across all sites.
inline FockOperator total_number_op(const HilbertLayout& layout) {
    const long dim = layout.total_dim();
    Matrix m = Matrix::Zero(dim, dim);
    for (long idx = 0; idx < dim; ++idx) {
        auto occ = layout.occupations_of(idx);
        int total = 0;
        for (int n : occ) total += n;
        m(idx, idx) = static_cast<double>(total);
    }
    return FockOperator(layout, std::move(m));
}

/// Partition of all composite basis indices by total excitation number.
inline std::map<int, std::vector<long>> excitation_sectors(const HilbertLayout& layout) {
    std::map<int, std::vector<long>> sectors;
    const long dim = layout.total_dim();
    for (long idx = 0; idx < dim; ++idx) {
        auto occ = layout.occupations_of(idx);
        int total = 0;
        for (int n : occ) total += n;
        sectors[total].push_back(idx);
    }
    return sectors;
}

/// Projector onto states with every local occupation <= 1; rank 2^sites.
inline SubspaceProjector computational_projector(const HilbertLayout& layout) {
    std::vector<long> indices;
    const long dim = layout.total_dim();
    for (long idx = 0; idx < dim; ++idx) {
        auto occ = layout.occupations_of(idx);
        bool in_subspace = true;
        for (int n : occ)
            if (n > 1) { in_subspace = false; break; }
        if (in_subspace) indices.push_back(idx);
    }
    return SubspaceProjector(layout, std::move(indices));
}

}  // namespace fockspace
}  // namespace pulsesim

#endif  // PULSESIM_FOCKSPACE_HPP
