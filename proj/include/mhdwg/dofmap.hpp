// Global degree-of-freedom management and boundary constraints:
//   - velocity traces on boundary edges eliminated (u_hb = 0 or lifted data),
//   - magnetic boundary traces rotated to (normal, tangential) with the
//     tangential part eliminated (B x n = 0 on the boundary),
//   - pseudo-pressure traces on boundary edges eliminated (r = 0),
//   - pressure traces free everywhere, one scalar multiplier enforcing the
//     zero mean of the interior pressure.
//
// Interior unknowns are numbered first, element-major with per-element blocks
// [u | p | B | r], then traces edge-major, then the multiplier. Besides the
// coupled numbering, the same dofs carry compact numberings for the
// momentum-only (u, p, lambda) and magnetic-only (B, r) subsystems used by
// the decoupled iteration.

#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "mhdwg/mesh.hpp"
#include "mhdwg/polybasis.hpp"

namespace mhdwg {

enum class Space { All = 0, Momentum = 1, Magnetic = 2 };

class DofMap {
public:
  DofMap(const Mesh& mesh, int k) : mesh_(&mesh), k_(k) {
    if (k < 1) throw std::invalid_argument("DofMap: k must be >= 1");
    no_ = tri_space_dim(k);
    npo_ = tri_space_dim(k - 1);
    nb_ = k + 1;

    const int E = mesh.num_elements();
    const int ne = mesh.num_edges();

    for (int s = 0; s < 3; ++s) {
      edge_u_[s].assign(ne, -1);
      edge_p_[s].assign(ne, -1);
      edge_B_[s].assign(ne, -1);
      edge_r_[s].assign(ne, -1);
    }

    int blockAll = 4 * no_ + 2 * npo_;
    int blockSub = 2 * no_ + npo_;
    n_interior_[0] = E * blockAll;
    n_interior_[1] = E * blockSub;
    n_interior_[2] = E * blockSub;

    for (int s = 0; s < 3; ++s) {
      int off = n_interior_[s];
      for (int e = 0; e < ne; ++e) {
        bool bnd = mesh.edge(e).boundary;
        Space sp = static_cast<Space>(s);
        if (sp != Space::Magnetic) {
          if (!bnd) {
            edge_u_[s][e] = off;
            off += 2 * nb_;
          }
          edge_p_[s][e] = off;
          off += nb_;
        }
        if (sp != Space::Momentum) {
          edge_B_[s][e] = off;
          off += bnd ? nb_ : 2 * nb_;
          if (!bnd) {
            edge_r_[s][e] = off;
            off += nb_;
          }
        }
      }
      lambda_[s] = (sp_has_lambda(static_cast<Space>(s))) ? off++ : -1;
      total_[s] = off;
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  int k() const { return k_; }
  int n_interior_scalar() const { return no_; }
  int n_interior_pressure() const { return npo_; }
  int n_trace_scalar() const { return nb_; }

  int total(Space s) const { return total_[idx(s)]; }
  int n_interior(Space s) const { return n_interior_[idx(s)]; }
  int n_trace(Space s) const {
    return total_[idx(s)] - n_interior_[idx(s)] - (lambda_index(s) >= 0 ? 1 : 0);
  }
  int lambda_index(Space s) const { return lambda_[idx(s)]; }

  // offsets of the per-element interior blocks
  int u_interior(int K, Space s) const {
    require(s != Space::Magnetic, "u dofs not in the magnetic space");
    return element_base(K, s) + 0;
  }
  int p_interior(int K, Space s) const {
    require(s != Space::Magnetic, "p dofs not in the magnetic space");
    return element_base(K, s) + 2 * no_;
  }
  int B_interior(int K, Space s) const {
    require(s != Space::Momentum, "B dofs not in the momentum space");
    return element_base(K, s) + (s == Space::All ? 2 * no_ + npo_ : 0);
  }
  int r_interior(int K, Space s) const {
    require(s != Space::Momentum, "r dofs not in the momentum space");
    return element_base(K, s) + (s == Space::All ? 4 * no_ + npo_ : 2 * no_);
  }

  // trace offsets; -1 when the dofs are eliminated by the boundary conditions
  int u_trace(int e, Space s) const { return edge_u_[idx(s)][e]; }
  int p_trace(int e, Space s) const { return edge_p_[idx(s)][e]; }
  int B_trace(int e, Space s) const { return edge_B_[idx(s)][e]; }
  int r_trace(int e, Space s) const { return edge_r_[idx(s)][e]; }
  int B_trace_size(int e) const { return mesh_->edge(e).boundary ? nb_ : 2 * nb_; }

private:
  static bool sp_has_lambda(Space s) { return s != Space::Magnetic; }
  static int idx(Space s) { return static_cast<int>(s); }
  static void require(bool ok, const char* msg) {
    if (!ok) throw std::logic_error(msg);
  }
  int element_base(int K, Space s) const {
    int block = (s == Space::All) ? 4 * no_ + 2 * npo_ : 2 * no_ + npo_;
    return K * block;
  }

  const Mesh* mesh_;
  int k_, no_ = 0, npo_ = 0, nb_ = 0;
  int total_[3] = {0, 0, 0};
  int n_interior_[3] = {0, 0, 0};
  int lambda_[3] = {-1, -1, -1};
  std::vector<int> edge_u_[3], edge_p_[3], edge_B_[3], edge_r_[3];
};

}  // namespace mhdwg
