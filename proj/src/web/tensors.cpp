#include "divweb/web.hpp"

namespace divweb {

namespace {

Expr second_partial(const WebChart& w, int k, int l) {
  return simplify(differentiate(differentiate(w.log_density(), k), l));
}

}  // namespace

SymTensorField nonuniformity_tensor(const WebChart& w) {
  const int m = w.dim();
  SymTensorField K(m);
  for (int k = 0; k < m; ++k)
    for (int l = k + 1; l < m; ++l)
      if (!w.same_block(k, l)) K.set(k, l, second_partial(w, k, l));
  return K;
}

TrivialityVerdict is_locally_trivial(const WebChart& w, double tol, int samples) {
  const SymTensorField K = nonuniformity_tensor(w);
  TrivialityVerdict out;
  for (int k = 0; k < w.dim(); ++k)
    for (int l = k + 1; l < w.dim(); ++l) {
      if (w.same_block(k, l)) continue;
      EntryVerdict e{k, l, is_identically_zero(K(k, l), w.domain(), samples, tol)};
      if (!e.verdict.is_zero()) out.trivial = false;
      if (e.verdict.max_abs > out.max_abs || (out.k < 0 && !e.verdict.is_zero())) {
        out.max_abs = e.verdict.max_abs;
        out.k = k;
        out.l = l;
        out.witness = e.verdict.witness;
      }
      out.entries.push_back(std::move(e));
    }
  if (out.trivial) {
    out.k = out.l = -1;
    out.witness.clear();
  }
  return out;
}

std::vector<std::vector<Expr>> connection_form(const WebChart& w) {
  std::vector<std::vector<Expr>> out(static_cast<std::size_t>(w.block_count()));
  for (int i = 0; i < w.block_count(); ++i)
    for (int k = w.block_begin(i); k < w.block_end(i); ++k)
      out[static_cast<std::size_t>(i)].push_back(simplify(differentiate(w.log_density(), k)));
  return out;
}

std::vector<std::vector<CurvatureTerm>> curvature_form(const WebChart& w) {
  const auto omega = connection_form(w);
  std::vector<std::vector<CurvatureTerm>> out(omega.size());
  for (int i = 0; i < w.block_count(); ++i)
    for (int k = w.block_begin(i); k < w.block_end(i); ++k)
      for (int l = 0; l < w.dim(); ++l) {
        if (w.same_block(k, l)) continue;
        const Expr& coeff = omega[static_cast<std::size_t>(i)][static_cast<std::size_t>(k - w.block_begin(i))];
        out[static_cast<std::size_t>(i)].push_back({l, k, simplify(differentiate(coeff, l))});
      }
  return out;
}

std::vector<std::vector<Expr>> ricci_tensor(const WebChart& w) {
  using namespace build;
  const int m = w.dim();
  auto idx = [](int a) { return static_cast<std::size_t>(a); };

  // Γ^a_bc, nonzero only for a = b = c.
  std::vector<Expr> diag(idx(m));
  for (int a = 0; a < m; ++a) diag[idx(a)] = simplify(differentiate(w.log_density(), a));
  auto gamma = [&](int a, int b, int c) -> Expr { return a == b && b == c ? diag[idx(a)] : Expr(); };

  // Rc_ik = Σ_j R^j_{ijk},
  // R^l_{ijk} = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik.
  std::vector<std::vector<Expr>> rc(idx(m), std::vector<Expr>(idx(m)));
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) {
      Expr sum;
      for (int j = 0; j < m; ++j) {
        Expr r = sub(differentiate(gamma(j, j, k), i), differentiate(gamma(j, i, k), j));
        for (int n = 0; n < m; ++n) {
          r = add(r, mul(gamma(j, i, n), gamma(n, j, k)));
          r = sub(r, mul(gamma(j, j, n), gamma(n, i, k)));
        }
        sum = add(sum, r);
      }
      rc[idx(i)][idx(k)] = simplify(sum);
    }
  return rc;
}

SymTensorField ricci_offdiag(const WebChart& w) {
  const auto rc = ricci_tensor(w);
  SymTensorField out(w.dim());
  for (int k = 0; k < w.dim(); ++k)
    for (int l = k + 1; l < w.dim(); ++l)
      if (!w.same_block(k, l)) out.set(k, l, rc[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
  return out;
}

}  // namespace divweb
