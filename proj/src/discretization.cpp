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
#include "slabt/discretization.hpp"

namespace slabt {

  MatC build_crossed_matrix( const SpatialGrid& g, double E, double E_d,
                             double k_ell )
  {
    if ( E < 0.0 || E > kEi + E_d )
      throw DomainError("build_crossed_matrix: internal energy outside"
                        " [0, E_i + E_d]");
    const double Et = kEi + E_d - E;
    const Cplx mu( 1.0, -k_ell * ( std::sqrt(E) - std::sqrt(Et) ) );
    return propagation_matrix<Cplx>( g, mu );
  }

  Vec build_source( const SpatialGrid& g )
  {
    return ( -g.z.array() ).exp().matrix();
  }

  namespace {

    double secant_check( double theta )
    {
      if ( !( std::abs(theta) < M_PI / 2 ) )
        throw DomainError("backscattering angle must satisfy |theta| < pi/2");
      return 1.0 / std::cos(theta);
    }

    double detection_mismatch( double E_d, double k_ell )
    {
      if ( !(E_d > 0.0) )
        throw DomainError("detected energy must be positive");
      return k_ell * ( 1.0 - std::sqrt( E_d / kEi ) );
    }

  }

  VecC build_crossed_source( const SpatialGrid& g, double theta, double E_d,
                             double k_ell )
  {
    const double sec = secant_check( theta );
    const double q = detection_mismatch( E_d, k_ell );
    return ( Cplx( -0.5 * ( 1.0 + sec ), q ) * g.z.cast<Cplx>().array() )
      .exp().matrix();
  }

  Vec ladder_projection( const SpatialGrid& g, double theta )
  {
    const double sec = secant_check( theta );
    return ( g.h * ( -sec * g.z.array() ).exp() ).matrix();
  }

  VecC crossed_projection( const SpatialGrid& g, double theta, double E_d,
                           double k_ell )
  {
    const double sec = secant_check( theta );
    const double q = detection_mismatch( E_d, k_ell );
    return ( g.h * ( Cplx( -0.5 * ( 1.0 + sec ), -q )
                     * g.z.cast<Cplx>().array() ).exp() ).matrix();
  }

  LadderTables build_ladder_tables( const EnergyGrid& eg,
                                    const InteractionParams& p )
  {
    const Index NE = eg.NE;
    LadderTables t;
    t.NE = NE;
    t.fhat.assign( std::size_t(NE) * NE * NE, 0.0 );
    t.ghat = Mat::Zero( NE, NE );
    if ( p.alpha == 0.0 )
      return t;

    const Vec sqE = eg.E.array().sqrt().matrix();
    const Vec w0 = eg.w.cwiseProduct( sqE );               //particle moment
    const Vec w1 = w0.cwiseProduct( eg.E );                //energy moment
    const Vec w2 = w1.cwiseProduct( eg.E );

    for ( Index a = 0; a < NE; ++a ) {
      for ( Index b = 0; b < NE; ++b ) {
        double* col = &t.fhat[ std::size_t( a * NE + b ) * NE ];
        for ( Index k = 0; k < NE; ++k )
          col[k] = ladder_f( eg.E[a], eg.E[b], eg.E[k], p );
        double S0 = 0.0, S1 = 0.0, S2 = 0.0;
        for ( Index k = 0; k < NE; ++k ) {
          S0 += w0[k] * col[k];
          S1 += w1[k] * col[k];
          S2 += w2[k] * col[k];
        }
        if ( S0 > 0.0 ) {
          const double c = S1 / S0;
          const double var = S2 - S1 * c;
          //columns whose gain spectrum has no resolvable variance (a single
          //grid node inside the kinematic window) cannot be moment-corrected;
          //leave them unscaled rather than dividing by rounding noise
          if ( var > 1e-10 * S2 ) {
            const double y = ( ( eg.E[a] + eg.E[b] ) * S0 - 2.0 * S1 )
              / ( 2.0 * var );
            S0 = 0.0;
            for ( Index k = 0; k < NE; ++k ) {
              col[k] *= 1.0 + y * ( eg.E[k] - c );
              S0 += w0[k] * col[k];
            }
          }
          t.ghat(a, b) = -S0 / sqE[b];
        }
      }
    }

    //residuals of the discrete conservation identities (should be rounding)
    for ( Index a = 0; a < NE; ++a ) {
      for ( Index b = 0; b < NE; ++b ) {
        const double* col = &t.fhat[ std::size_t( a * NE + b ) * NE ];
        double S0 = 0.0, S1 = 0.0;
        for ( Index k = 0; k < NE; ++k ) {
          S0 += w0[k] * col[k];
          S1 += w1[k] * col[k];
        }
        t.particle_residual = std::max( t.particle_residual,
                                        std::abs( S0 + sqE[b] * t.ghat(a, b) ) );
        t.energy_residual = std::max( t.energy_residual,
                                      std::abs( 2.0 * S1
                                                - ( eg.E[a] + eg.E[b] ) * S0 ) );
      }
    }
    return t;
  }

}
