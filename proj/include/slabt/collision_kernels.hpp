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
#ifndef slabt_collision_kernels_hpp
#define slabt_collision_kernels_hpp

#include "slabt/core.hpp"
#include <algorithm>
#include <cmath>

//Closed-form s-wave collision kernels: the ladder pair (g, f), the crossed
//blocks (g^C, h^C, f^C), and the conservation / reversibility / thermal
//fixed-point oracles built on them. Everything is expressed in internal
//units (E_i = 1, ell_dis = 1, densities relative to the incident density),
//so the only couplings are the dimensionless alpha, beta and k_ell.
//
//Sign conventions: g <= 0 (elastic loss), f >= 0 (inelastic gain). Any
//kinematically closed configuration (negative square-root argument)
//evaluates to zero rather than erroring.

namespace slabt {

  struct InteractionParams {
    double alpha = 0.0;   //inelastic collision rate, ell_dis/ell_int
    double beta = 0.0;    //mean-field (Gross-Pitaevskii) coupling
    double k_ell = 10.0;  //weak-disorder parameter ell_dis*sqrt(E_i)

    InteractionParams( double alpha_, double beta_, double k_ell_ )
      : alpha(alpha_), beta(beta_), k_ell(k_ell_)
    {
      if ( !(alpha >= 0.0) || !(beta >= 0.0) )
        throw DomainError("InteractionParams: alpha and beta must be >= 0");
      if ( !(k_ell > 1.0) )
        throw DomainError("InteractionParams: k_ell must be > 1"
                          " (weak-disorder regime)");
      if ( alpha > 0.0 && beta > 0.0 && !(beta > alpha) )
        throw DomainError("InteractionParams: beta/alpha must exceed 1"
                          " (s-wave regime)");
    }
  };

  inline double ladder_g( double E1, double E2, const InteractionParams& p )
  {
    if ( !(E1 > 0.0) || !(E2 > 0.0) )
      throw DomainError("ladder_g requires positive energies");
    const double r1 = std::sqrt(E1), r2 = std::sqrt(E2);
    const double s3 = std::pow( r1 + r2, 3 ) - std::pow( std::abs(r1 - r2), 3 );
    return -p.alpha * s3 / ( 6.0 * r1 * E2 );
  }

  inline double ladder_f( double E1, double E2, double E3,
                          const InteractionParams& p )
  {
    if ( !(E1 > 0.0) || !(E2 > 0.0) || !(E3 > 0.0) )
      throw DomainError("ladder_f requires positive energies");
    const double E4 = E1 + E2 - E3;
    if ( E4 < 0.0 )
      return 0.0;
    const double m = std::min( std::min( std::sqrt(E1), std::sqrt(E2) ),
                               std::min( std::sqrt(E3), std::sqrt(E4) ) );
    return p.alpha * m / std::sqrt( E1 * E2 * E3 );
  }

  namespace detail {

    //numerator of Eq.-(gcswave)-type attachments: i beta sqrt(E_i) plus the
    //alpha cubic combination of sqrt(E1), sqrt(E2)
    inline Cplx gc_numerator( double E1, double E2, const InteractionParams& p )
    {
      const double r1 = std::sqrt(E1), r2 = std::sqrt(E2);
      const double s3 = std::pow( r1 + r2, 3 ) - std::pow( std::abs(r1 - r2), 3 );
      return Cplx( p.alpha * s3 / ( 12.0 * r1 * r2 ), p.beta * std::sqrt(kEi) );
    }

    inline Cplx gc_dephasing( double E2, double Et2, double k_ell )
    {
      return Cplx( 1.0, -k_ell * ( std::sqrt(E2) - std::sqrt(Et2) ) );
    }

  }

  //Printed closed form of the crossed loss kernel; real-valued by
  //construction (the outer -2 Re{..} / sqrt(E2)).
  inline Cplx crossed_gC( double E1, double E2, double E_d,
                          const InteractionParams& p )
  {
    if ( !(E1 > 0.0) || !(E2 > 0.0) )
      throw DomainError("crossed_gC requires positive energies");
    const double Et2 = kEi + E_d - E2;
    if ( Et2 < 0.0 )
      return Cplx(0.0);
    const Cplx deph = detail::gc_dephasing( E2, Et2, p.k_ell );
    const Cplx val = detail::gc_numerator( E1, E2, p ) / ( deph * deph );
    return Cplx( -2.0 * val.real() / std::sqrt(E2), 0.0 );
  }

  //Directional split of g^C: attachment at E2 plus the conjugated attachment
  //at tilde-E2 over the shared dephasing denominator. Obeys
  //gdir(E1, tilde E2) = conj(gdir(E1, E2)) and reduces to crossed_gC at the
  //self-tilde point E2 = (E_i + E_d)/2. The crossed solver consumes this
  //form; the sum over a tilde-closed grid reproduces the printed kernel.
  inline Cplx crossed_gC_directional( double E1, double E2, double E_d,
                                      const InteractionParams& p )
  {
    if ( !(E1 > 0.0) || !(E2 > 0.0) )
      throw DomainError("crossed_gC_directional requires positive energies");
    const double Et2 = kEi + E_d - E2;
    if ( !(Et2 > 0.0) )
      return Cplx(0.0);
    const Cplx deph = detail::gc_dephasing( E2, Et2, p.k_ell );
    return -( detail::gc_numerator( E1, E2, p ) / std::sqrt(E2)
              + std::conj( detail::gc_numerator( E1, Et2, p ) ) / std::sqrt(Et2) )
           / ( deph * deph );
  }

  inline Cplx crossed_h( double E1, double E2, double E_d,
                         const InteractionParams& p )
  {
    const double Et1 = kEi + E_d - E1;
    const double Et2 = kEi + E_d - E2;
    if ( Et1 < 0.0 || Et2 < 0.0 )
      return Cplx(0.0);
    const Cplx num( -p.alpha * std::sqrt( 2.0 * kEi + 2.0 * E_d ),
                    -2.0 * p.beta * std::sqrt(kEi) );
    const Cplx den = detail::gc_dephasing( E2, Et2, p.k_ell )
      * Cplx( std::sqrt(E1) + std::sqrt(Et1), -p.k_ell * ( E1 - Et1 ) );
    return num / den;
  }

  //16-term k_s sum. Slots 2 and 3 pair a tilde-energy square root (s = 0)
  //with a negated plain one (s = 1); slots 1 and 4 carry plain square roots
  //with both signs. A vanishing k_s contributes nothing (continuous limit
  //of |x| and x ln|x|).
  inline Cplx crossed_fC( double E1, double E2, double E3, double E_d,
                          const InteractionParams& p )
  {
    if ( !(E1 > 0.0) || !(E2 > 0.0) || !(E3 > 0.0) )
      throw DomainError("crossed_fC requires positive energies");
    if ( p.alpha == 0.0 )
      return Cplx(0.0);
    const double Et2 = kEi + E_d - E2;
    const double Et3 = kEi + E_d - E3;
    const double E4 = E1 + E2 - E3;
    if ( Et2 < 0.0 || Et3 < 0.0 || E4 < 0.0 )
      return Cplx(0.0);
    const double r1 = std::sqrt(E1), r2 = std::sqrt(E2), r3 = std::sqrt(E3);
    const double rt2 = std::sqrt(Et2), rt3 = std::sqrt(Et3);
    const double r4 = std::sqrt(E4);
    Cplx sum(0.0);
    for ( int s1 = 0; s1 < 2; ++s1 ) {
      const double t1 = s1 ? -r1 : r1;
      for ( int s2 = 0; s2 < 2; ++s2 ) {
        const double t2 = s2 ? -r2 : rt2;
        for ( int s3 = 0; s3 < 2; ++s3 ) {
          const double t3 = s3 ? -r3 : rt3;
          for ( int s4 = 0; s4 < 2; ++s4 ) {
            const double ks = t1 + t2 + t3 + ( s4 ? -r4 : r4 );
            if ( ks == 0.0 )
              continue;
            const double sign = ( (s1 + s2 + s3 + s4) % 2 == 0 ) ? -1.0 : 1.0;
            sum += sign * Cplx( std::abs(ks),
                                2.0 * ks * std::log( std::abs(ks) ) / M_PI );
          }
        }
      }
    }
    const Cplx d2( r2 + rt2, -p.k_ell * ( E2 - Et2 ) );
    const Cplx d3( r3 + rt3, -p.k_ell * ( E3 - Et3 ) );
    return p.alpha * sum / ( r1 * d2 * d3 );
  }

  //Quadrature control for the oracle integrals: panels at the kernels'
  //breakpoints, Gauss-Legendre nodes per panel, point count doubled until
  //two successive evaluations agree to abs_tol.
  struct Quadrature {
    double abs_tol = 1e-8;
    int initial_points = 24;
    int max_points = 384;
  };

  //sqrt(E2) g(E1,E2) + integral of sqrt(E) f(E1,E2,E); zero when particle
  //flux is conserved.
  double check_particle_conservation( double E1, double E2,
                                      const InteractionParams& p,
                                      const Quadrature& q = {} );

  //(E1+E2) sqrt(E2) g(E1,E2) + integral of 2 E sqrt(E) f(E1,E2,E); zero when
  //energy flux is conserved.
  double check_energy_conservation( double E1, double E2,
                                    const InteractionParams& p,
                                    const Quadrature& q = {} );

  //f(E1,E2,E3)/sqrt(E1+E2-E3) - f(E3,E1+E2-E3,E1)/sqrt(E2); identically zero
  //for the s-wave closed form (microscopic reversibility).
  double check_reversibility( double E1, double E2, double E3,
                              const InteractionParams& p );

  //Relative residual of the collision operator applied to the thermal
  //profile sqrt(E) exp(-2E/E_i), evaluated with the continuum kernels at
  //observation energy E_obs on [0, E_max]. The thermal spectrum is a fixed
  //point, so this measures pure quadrature error.
  double mb_collision_residual( double E_obs, double E_max,
                                const InteractionParams& p,
                                const Quadrature& q = {} );

}

#endif
