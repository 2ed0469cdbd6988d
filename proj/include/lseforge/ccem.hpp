#pragma once

#include <cstdint>
#include <span>

#include "lseforge/accountant.hpp"
#include "lseforge/backend.hpp"
#include "lseforge/cce.hpp"
#include "lseforge/losses.hpp"
#include "lseforge/matrix.hpp"
#include "lseforge/neg_index.hpp"

namespace lseforge {

// Fused linear-log-sum-exp restricted to each row's sampled candidate set.
// Candidate columns of C are gathered one at a time into a small staging
// buffer; the LSE accumulates online, so retained memory stays at 2N scalars
// (plus the candidate index matrix itself) for any ns.
LossOutput ccem_forward(const DenseMatrix& E, const DenseMatrix& C, const NegIndexMatrix& inds,
                        const CceConfig& cfg = {}, MemAccountant* acct = nullptr);

// Recomputes the per-slot logits, forms softmax values against the stored
// LSE, applies the minus-one correction at slot 0, and accumulates
// d_embeddings per row plus indexed scatter-adds into d_classifier.
// Gradient filtering deliberately does not apply here; cfg.filter_eps is
// ignored by this backend.
GradPair ccem_backward(const DenseMatrix& E, const DenseMatrix& C, const NegIndexMatrix& inds,
                       std::span<const double> lse, double upstream, const CceConfig& cfg = {},
                       MemAccountant* acct = nullptr);

// General-reduction form: row_upstream[i] is the derivative of the total
// objective with respect to row i's loss term (lse[i] − pos_logit[i]). The
// scalar-upstream overload equals this with row_upstream[i] = upstream / N.
GradPair ccem_backward_rows(const DenseMatrix& E, const DenseMatrix& C, const NegIndexMatrix& inds,
                            std::span<const double> lse, std::span<const double> row_upstream,
                            const CceConfig& cfg = {}, MemAccountant* acct = nullptr);

// Multiply-accumulate counts for one loss-layer pass, by closed form:
// forward = N·D·(scored items per row), where the scored count is V for the
// full-catalog backends, 1+ns for the sampled ones, and 2 for bce; backward
// is 2x forward where logits are materialized and reused (ce, cem, bce) and
// 3x forward where the fused backends recompute them (cce, ccem).
struct FlopEstimate {
  std::uint64_t forward = 0;
  std::uint64_t backward = 0;
};

FlopEstimate estimate_flops(std::size_t n, std::size_t d, std::size_t v, std::size_t ns,
                            Backend backend);

}  // namespace lseforge
