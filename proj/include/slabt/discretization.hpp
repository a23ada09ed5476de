////////////////////////////////////////////////////////////////////////////////
//                                                                            //
//  This file is part of slab-transport.                                      //
//                                                                            //
//  Copyright 2026 slab-transport developers                                  //
//                                                                            //
//  Licensed under the Apache License, Version 2.0 (the "License");           //
//  you may not use this file except in compliance with the License.          //
//  You may obtain a copy of the License at                                   //
//                                                                            //
//      http://www.apache.org/licenses/LICENSE-2.0                            //
//                                                                            //
//  Unless required by applicable law or agreed to in writing, software       //
//  distributed under the License is distributed on an "AS IS" BASIS,         //
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.  //
//  See the License for the specific language governing permissions and       //
//  limitations under the License.                                            //
//                                                                            //
////////////////////////////////////////////////////////////////////////////////
#ifndef slabt_discretization_hpp
#define slabt_discretization_hpp

#include "slabt/collision_kernels.hpp"
#include "slabt/special_functions.hpp"
#include <vector>

//Depth and energy grids, the elastic+smooth spectral-field split, the
//cell-integrated slab propagation matrices (real for ladder transport,
//complex for dephased crossed transport) and the moment-corrected discrete
//collision tables that make the grid-level conservation identities exact.

namespace slabt {

  //uniform depth cells on [0, b], field values at cell midpoints
  struct SpatialGrid {
    double b;
    Index Nz;
    double h;
    Vec z;

    SpatialGrid( double b_, Index nz ) : b(b_), Nz(nz)
    {
      if ( !(b > 0.0) || nz < 1 )
        throw DomainError("SpatialGrid requires b > 0 and Nz >= 1");
      h = b / double(Nz);
      z = ( ( Vec::LinSpaced( Nz, 0.0, double(Nz - 1) ).array() + 0.5 ) * h )
        .matrix();
    }
  };

  //uniform energy nodes k*h, k = 1..NE, on (0, E_max]; the E = 0 endpoint
  //half-cell is folded onto the first node so the weights close the
  //quadrature (sum w = E_max). E_i must land on a node.
  struct EnergyGrid {
    double E_max;
    Index NE;
    double h;
    Vec E, w;
    Index i_Ei;

    EnergyGrid( double emax, Index ne ) : E_max(emax), NE(ne)
    {
      if ( !(emax > kEi) || ne < 2 )
        throw DomainError("EnergyGrid requires E_max > E_i and NE >= 2");
      h = E_max / double(NE);
      E = Vec::LinSpaced( NE, 1.0, double(NE) ) * h;
      w = Vec::Constant( NE, h );
      w[0] = 1.5 * h;
      w[NE - 1] = 0.5 * h;
      i_Ei = Index( std::lround( kEi / h ) ) - 1;
      if ( i_Ei < 0 || i_Ei >= NE || std::abs( E[i_Ei] - kEi ) > 1e-12 )
        throw DomainError("EnergyGrid: E_i does not coincide with a node"
                          " (choose NE so that E_max/NE divides E_i)");
    }
  };

  //internal energy grid of a crossed solve: uniform nodes on the open
  //kinematic interval (0, E_i + E_d), closed under the tilde map
  //E -> E_i + E_d - E. The spacing divides E_i exactly and E_d is snapped
  //to the nearest multiple, so E_i, E_d and the self-tilde midpoint relate
  //to nodes automatically. Endpoint half-cells are folded onto the first
  //and last node (the crossed kernels carry 1/sqrt endpoint singularities).
  struct CrossedGrid {
    double E_d;    //snapped detected energy
    double E_max;  //E_i + E_d after snapping
    double h;
    Index NE;
    Vec E, w;
    std::vector<Index> tilde;  //index of E_i + E_d - E[k]
    Index ki;                  //node at E_i
    Index kd;                  //node at E_d

    explicit CrossedGrid( double ed, double target_h = 0.025 )
    {
      if ( !(ed > 0.0) || !(target_h > 0.0) )
        throw DomainError("CrossedGrid requires E_d > 0 and target_h > 0");
      const Index ni = std::max<Index>( 2, Index( std::lround( kEi / target_h ) ) );
      h = kEi / double(ni);
      const Index nd = std::max<Index>( 1, Index( std::lround( ed / h ) ) );
      E_d = double(nd) * h;
      const Index n = ni + nd;
      E_max = double(n) * h;
      NE = n - 1;
      E = Vec::LinSpaced( NE, 1.0, double(NE) ) * h;
      w = Vec::Constant( NE, h );
      w[0] = 1.5 * h;
      w[NE - 1] = 1.5 * h;
      tilde.resize( NE );
      for ( Index k = 0; k < NE; ++k )
        tilde[k] = NE - 1 - k;
      ki = ni - 1;
      kd = nd - 1;
    }
  };

  //spectral density split into the coefficient of delta(E - E_i) plus a
  //smooth remainder tabulated on (energy node, depth node)
  template<class TScalar>
  struct SpectralFieldT {
    Eigen::Vector<TScalar, Eigen::Dynamic> elastic;
    Eigen::Matrix<TScalar, Eigen::Dynamic, Eigen::Dynamic> smooth;
  };
  using SpectralField = SpectralFieldT<double>;
  using SpectralFieldC = SpectralFieldT<Cplx>;

  //propagation matrix (1/2) E1(mu |z - z'|) exactly integrated over the
  //source cell z'; symmetric Toeplitz on a uniform grid
  template<class TScalar>
  Eigen::Matrix<TScalar, Eigen::Dynamic, Eigen::Dynamic>
  propagation_matrix( const SpatialGrid& g, TScalar mu )
  {
    std::vector<TScalar> t( g.Nz );
    t[0] = cell_integrated_e1( mu, 0.0, 0.5 * g.h );
    for ( Index d = 1; d < g.Nz; ++d )
      t[d] = TScalar(0.5) * cell_integrated_e1( mu, ( d - 0.5 ) * g.h,
                                                ( d + 0.5 ) * g.h );
    Eigen::Matrix<TScalar, Eigen::Dynamic, Eigen::Dynamic> K( g.Nz, g.Nz );
    for ( Index i = 0; i < g.Nz; ++i )
      for ( Index j = 0; j < g.Nz; ++j )
        K(i, j) = t[ i > j ? i - j : j - i ];
    return K;
  }

  inline Mat build_ladder_matrix( const SpatialGrid& g )
  {
    return propagation_matrix<double>( g, 1.0 );
  }

  //crossed propagation at internal energy E for detected energy E_d:
  //mu = 1 - i k_ell (sqrt(E) - sqrt(Etilde)); equals the ladder matrix at
  //the self-tilde point
  MatC build_crossed_matrix( const SpatialGrid& g, double E, double E_d,
                             double k_ell );

  //coherent ladder source exp(-z) at depth nodes (normal incidence)
  Vec build_source( const SpatialGrid& g );

  //crossed source exp(i q z - (z + z/cos(theta))/2) with the longitudinal
  //detection mismatch q = k_ell (1 - sqrt(E_d/E_i)); reduces to the ladder
  //source at theta = 0, E_d = E_i
  VecC build_crossed_source( const SpatialGrid& g, double theta, double E_d,
                             double k_ell );

  //midpoint projection weights h exp(-z/cos(theta)) of the outgoing ladder
  //flux at backscattering angle theta
  Vec ladder_projection( const SpatialGrid& g, double theta = 0.0 );

  //crossed projection weights h exp(-i q z - (z + z/cos(theta))/2), the
  //conjugate phase of the crossed source
  VecC crossed_projection( const SpatialGrid& g, double theta, double E_d,
                           double k_ell );

  //discrete collision tables on an EnergyGrid. The gain table is the exact
  //kernel rebalanced per (E1, E2) column by a linear-in-E factor so that
  //the discrete particle and energy moments match the continuum identities
  //exactly; the loss table is then defined by the discrete particle sum.
  //This makes the grid-level flux identities (J = J_linear, K = E_i J)
  //hold to rounding, independent of the energy resolution.
  struct LadderTables {
    Index NE = 0;
    std::vector<double> fhat;  //fhat[(a*NE + b)*NE + k] = f(E_a, E_b, E_k)
    Mat ghat;                  //ghat(a, b): loss at E_b from partner E_a
    double particle_residual = 0.0;  //worst discrete conservation defect
    double energy_residual = 0.0;

    double f( Index a, Index b, Index k ) const
    {
      return fhat[ std::size_t( ( a * NE + b ) * NE + k ) ];
    }
  };

  LadderTables build_ladder_tables( const EnergyGrid& eg,
                                    const InteractionParams& p );

}

#endif
