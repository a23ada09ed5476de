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
#ifndef slabt_ladder_solver_hpp
#define slabt_ladder_solver_hpp

#include "slabt/discretization.hpp"
#include <functional>

//Damped fixed-point solution of the nonlinear ladder transport equation on
//the slab, split into an elastic delta channel A(z) and a smooth inelastic
//spectrum B_E(z), plus the incoherent observables (flux profiles, spectral
//distributions, bistatic coefficients, thermalization metrics).

namespace slabt {

  //iteration diagnostics callback: (iteration index, residual, seconds)
  using IterationLog = std::function<void( int, double, double )>;

  struct LadderConfig {
    InteractionParams params{ 0.0, 0.0, 10.0 };
    double b = 10.0;
    Index Nz = 200;
    Index NE = 100;
    double E_max = 5.0;
    double damping = 0.5;
    double tol = 1e-8;
    int max_iters = 60000;
    IterationLog log;
    int log_every = 0;

    void validate() const
    {
      if ( !( tol > 0.0 ) || !( damping > 0.0 && damping <= 1.0 ) )
        throw DomainError("LadderConfig requires tol > 0 and"
                          " damping in (0, 1]");
    }
  };

  struct LadderSolution {
    SpatialGrid zg;
    EnergyGrid eg;
    InteractionParams params;
    SpectralField field;       //elastic A(z), smooth B(E, z)
    Vec J_linear;              //solution of the linear transport equation
    Mat K;                     //ladder propagation matrix
    Vec I0;                    //coherent source
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history;
  };

  //direct solve of the linear transport equation J = I0 + K J
  Vec solve_linear( const Mat& K, const Vec& I0 );

  LadderSolution solve_ladder( const LadderConfig& cfg );

  struct FluxProfiles {
    Vec J, J_el, J_inel, K_energy;
  };
  FluxProfiles flux_profiles( const LadderSolution& sol );

  //normalized inelastic flux spectrum sqrt(E) B_E at the depth node nearest
  //to z (unit discrete integral)
  Vec spectral_distribution( const LadderSolution& sol, double z );

  //L1 distance between the normalized inelastic spectrum at depth z and the
  //thermal profile (4 E / E_i^2) exp(-2 E / E_i)
  double thermal_l1_distance( const LadderSolution& sol, double z );

  struct LadderBistatic {
    Vec gamma_E;       //inelastic spectral density over the energy grid
    double elastic;    //delta-channel coefficient (includes single scattering)
    double inelastic;  //integrated smooth part
    double total;      //elastic + inelastic
    double single;     //single-scattering contribution (from the source)
  };

  //bistatic coefficient of the incoherent background at backscattering
  //angle theta (|theta| < pi/2)
  LadderBistatic ladder_bistatic( const LadderSolution& sol,
                                  double theta = 0.0 );

  //reflected plus transmitted plus coherently transmitted flux; equals the
  //incident flux up to discretization error
  double flux_closure( const LadderSolution& sol );

}

#endif
