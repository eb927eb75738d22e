#include "helixstab/elastic.hpp"

#include <vector>

namespace helixstab {

namespace {

using Triplet = Eigen::Triplet<Real>;

Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3 sym_outer(const Vec3& a, const Vec3& b) {
  return a * b.transpose() + b * a.transpose();
}

// Guard for the tan(phi/2) singularity at phi -> pi.
void check_turning(Real cos_phi, int node) {
  if (cos_phi <= -1.0 + 1e-9)
    throw DegenerateGeometry("adjacent tangents nearly anti-parallel at node " +
                             std::to_string(node));
}

// Shared data for one interior-node stencil.
struct NodeStencil {
  Vec3 u, v;        // unit tangents of edges i-1, i
  Real len_a, len_b;  // deformed edge lengths
  Real c, chi;        // c = u.v, chi = 1 + c
  Vec3 kb;            // curvature binormal 2 (u x v) / chi
  Real voronoi;       // undeformed Voronoi length at the node
};

NodeStencil make_stencil(const RodState& state, int i) {
  NodeStencil s;
  const Vec3 a = state.edge(i - 1);
  const Vec3 b = state.edge(i);
  s.len_a = a.norm();
  s.len_b = b.norm();
  if (s.len_a < 1e-14 || s.len_b < 1e-14)
    throw DegenerateGeometry("zero-length edge at node " + std::to_string(i));
  s.u = a / s.len_a;
  s.v = b / s.len_b;
  s.c = s.u.dot(s.v);
  check_turning(s.c, i);
  s.chi = 1.0 + s.c;
  s.kb = 2.0 * s.u.cross(s.v) / s.chi;
  s.voronoi = state.voronoi_length(i);
  return s;
}

// Scatters a 3x3 block into the triplet list at DOF offsets (row, col).
void add_block(std::vector<Triplet>& out, int row, int col, const Mat3& m) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.emplace_back(row + r, col + c, m(r, c));
}

}  // namespace

EnergyBreakdown elastic_energy(const RodState& state,
                               const MaterialParams& params) {
  const int n = state.num_edges();
  const Real ks = params.axial_stiffness();
  const Real kb = params.bending_stiffness();
  const Real kt = params.twisting_stiffness();

  EnergyBreakdown e;
  for (int i = 0; i < n; ++i) {
    const Real len = state.edge(i).norm();
    if (len < 1e-14)
      throw DegenerateGeometry("zero-length edge " + std::to_string(i));
    const Real rest = state.rest_edge_len(i);
    const Real strain = 1.0 - len / rest;
    e.stretching += 0.5 * ks * strain * strain * rest;
  }
  for (int i = 1; i < n; ++i) {
    const NodeStencil s = make_stencil(state, i);
    // (2 tan(phi/2))^2 = 4 (1 - c) / (1 + c) for an isotropic rod.
    e.bending += 2.0 * kb * (1.0 - s.c) / s.chi / s.voronoi;
    const Real tau =
        state.thetas(i) - state.thetas(i - 1) + state.ref_twist(i);
    e.twisting += 0.5 * kt * tau * tau / s.voronoi;
  }
  return e;
}

namespace {

// Assembles the energy gradient and/or Hessian in one pass.
void assemble(const RodState& state, const MaterialParams& params, VecX* grad,
              std::vector<Triplet>* hess) {
  const int n = state.num_edges();
  const Real ks = params.axial_stiffness();
  const Real kb_stiff = params.bending_stiffness();
  const Real kt = params.twisting_stiffness();

  if (grad) grad->setZero(state.dof_count());

  // Stretching, per edge.
  for (int j = 0; j < n; ++j) {
    const Vec3 e = state.edge(j);
    const Real len = e.norm();
    if (len < 1e-14)
      throw DegenerateGeometry("zero-length edge " + std::to_string(j));
    const Vec3 t = e / len;
    const Real rest = state.rest_edge_len(j);
    const Real strain = 1.0 - len / rest;
    const int i0 = pos_index(j), i1 = pos_index(j + 1);
    if (grad) {
      const Vec3 ge = -ks * strain * t;  // dE/de
      grad->segment<3>(i1) += ge;
      grad->segment<3>(i0) -= ge;
    }
    if (hess) {
      const Mat3 tt = t * t.transpose();
      const Mat3 h_ee =
          ks * (tt / rest - strain * (Mat3::Identity() - tt) / len);
      add_block(*hess, i0, i0, h_ee);
      add_block(*hess, i1, i1, h_ee);
      add_block(*hess, i0, i1, -h_ee);
      add_block(*hess, i1, i0, -h_ee);
    }
  }

  // Bending and twisting, per interior node.
  for (int i = 1; i < n; ++i) {
    const NodeStencil s = make_stencil(state, i);
    const int x0 = pos_index(i - 1), x1 = pos_index(i), x2 = pos_index(i + 1);
    const int th0 = theta_index(i - 1), th1 = theta_index(i);

    // dc/da, dc/db and their second derivatives (a, b are the edge vectors).
    const Vec3 wa = s.v - s.c * s.u;
    const Vec3 wb = s.u - s.c * s.v;
    const Vec3 da = wa / s.len_a;
    const Vec3 db = wb / s.len_b;

    // Bending energy as a function of c alone: E = 2 k_b/l * (1-c)/(1+c).
    const Real g1 = -4.0 * kb_stiff / (s.voronoi * s.chi * s.chi);
    const Real g2 = 8.0 * kb_stiff / (s.voronoi * s.chi * s.chi * s.chi);

    if (grad) {
      const Vec3 ga = g1 * da;
      const Vec3 gb = g1 * db;
      grad->segment<3>(x0) -= ga;
      grad->segment<3>(x1) += ga - gb;
      grad->segment<3>(x2) += gb;
    }
    if (hess) {
      const Mat3 pu = Mat3::Identity() - s.u * s.u.transpose();
      const Mat3 pv = Mat3::Identity() - s.v * s.v.transpose();
      const Mat3 c_aa =
          -(sym_outer(s.u, wa) + s.c * pu) / (s.len_a * s.len_a);
      const Mat3 c_bb =
          -(sym_outer(s.v, wb) + s.c * pv) / (s.len_b * s.len_b);
      const Mat3 c_ab =
          (pv - s.u * wb.transpose()) / (s.len_a * s.len_b);

      const Mat3 h_aa = g2 * da * da.transpose() + g1 * c_aa;
      const Mat3 h_bb = g2 * db * db.transpose() + g1 * c_bb;
      const Mat3 h_ab = g2 * da * db.transpose() + g1 * c_ab;
      const Mat3 h_ba = h_ab.transpose();

      add_block(*hess, x0, x0, h_aa);
      add_block(*hess, x0, x1, -h_aa + h_ab);
      add_block(*hess, x1, x0, (-h_aa + h_ab).transpose());
      add_block(*hess, x0, x2, -h_ab);
      add_block(*hess, x2, x0, -h_ba);
      add_block(*hess, x1, x1, h_aa - h_ab - h_ba + h_bb);
      add_block(*hess, x1, x2, h_ab - h_bb);
      add_block(*hess, x2, x1, (h_ab - h_bb).transpose());
      add_block(*hess, x2, x2, h_bb);
    }

    // Twisting. tau depends on thetas directly and on positions through the
    // reference twist; grad_a tau = kb/(2|a|), grad_b tau = kb/(2|b|).
    const Real tau =
        state.thetas(i) - state.thetas(i - 1) + state.ref_twist(i);
    const Real kt_l = kt / s.voronoi;
    const Vec3 ta = s.kb / (2.0 * s.len_a);
    const Vec3 tb = s.kb / (2.0 * s.len_b);
    const Vec3 g_t0 = -ta;       // d tau / d x0
    const Vec3 g_t1 = ta - tb;   // d tau / d x1
    const Vec3 g_t2 = tb;        // d tau / d x2

    if (grad) {
      const Real f = kt_l * tau;
      grad->segment<3>(x0) += f * g_t0;
      grad->segment<3>(x1) += f * g_t1;
      grad->segment<3>(x2) += f * g_t2;
      (*grad)(th0) -= f;
      (*grad)(th1) += f;
    }
    if (hess) {
      // Outer-product part kt/l * (grad tau)(grad tau)^T over the 11-DOF
      // stencil, plus kt/l * tau * hess(tau) on the position blocks.
      const Vec3 t_tilde = (s.u + s.v) / s.chi;
      const Mat3 t_aa = -sym_outer(s.kb, s.u + t_tilde) /
                        (4.0 * s.len_a * s.len_a);
      const Mat3 t_bb = -sym_outer(s.kb, s.v + t_tilde) /
                        (4.0 * s.len_b * s.len_b);
      const Mat3 t_ab = (2.0 / s.chi * cross_matrix(s.u) -
                         s.kb * t_tilde.transpose()) /
                        (2.0 * s.len_a * s.len_b);
      const Mat3 t_ba = t_ab.transpose();

      const Mat3 n00 = t_aa;
      const Mat3 n01 = -t_aa + t_ab;
      const Mat3 n02 = -t_ab;
      const Mat3 n11 = t_aa - t_ab - t_ba + t_bb;
      const Mat3 n12 = t_ab - t_bb;
      const Mat3 n22 = t_bb;

      const int idx[3] = {x0, x1, x2};
      const Vec3 g_pos[3] = {g_t0, g_t1, g_t2};
      const Mat3 n_blocks[3][3] = {
          {n00, n01, n02},
          {n01.transpose(), n11, n12},
          {n02.transpose(), n12.transpose(), n22}};

      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) {
          const Mat3 block = kt_l * (g_pos[p] * g_pos[q].transpose() +
                                     tau * n_blocks[p][q]);
          add_block(*hess, idx[p], idx[q], block);
        }
        // theta-position couplings from the outer product.
        const Vec3 col = kt_l * g_pos[p];
        for (int r = 0; r < 3; ++r) {
          hess->emplace_back(idx[p] + r, th0, -col(r));
          hess->emplace_back(th0, idx[p] + r, -col(r));
          hess->emplace_back(idx[p] + r, th1, col(r));
          hess->emplace_back(th1, idx[p] + r, col(r));
        }
      }
      hess->emplace_back(th0, th0, kt_l);
      hess->emplace_back(th1, th1, kt_l);
      hess->emplace_back(th0, th1, -kt_l);
      hess->emplace_back(th1, th0, -kt_l);
    }
  }
}

}  // namespace

VecX internal_forces(const RodState& state, const MaterialParams& params) {
  VecX grad;
  assemble(state, params, &grad, nullptr);
  return -grad;
}

Eigen::SparseMatrix<Real> energy_hessian(const RodState& state,
                                         const MaterialParams& params) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<size_t>(state.num_edges()) * 140);
  assemble(state, params, nullptr, &triplets);
  Eigen::SparseMatrix<Real> h(state.dof_count(), state.dof_count());
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

Eigen::SparseMatrix<Real> internal_jacobian(const RodState& state,
                                            const MaterialParams& params) {
  return Eigen::SparseMatrix<Real>(-energy_hessian(state, params));
}

}  // namespace helixstab
