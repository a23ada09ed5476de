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
#ifndef slabt_crossed_solver_hpp
#define slabt_crossed_solver_hpp

#include "slabt/ladder_solver.hpp"
#include <optional>

//Coupled crossed (coherent-backscattering) transport equations solved on
//top of a converged ladder solution, and the CBS observables: spectral and
//total bistatic coefficients, enhancement factors, and the mean-field
//crossover sweep.

namespace slabt {

  struct CrossedConfig {
    InteractionParams params{ 0.0, 0.0, 10.0 };
    double E_d = kEi;         //detected energy (snapped onto the grid)
    double theta = 0.0;       //backscattering angle
    double target_h = 0.025;  //internal energy resolution
    double damping = 0.5;
    double tol = 1e-10;
    int max_iters = 2000;
    IterationLog log;
    int log_every = 0;
  };

  struct CrossedSolution {
    CrossedGrid grid;
    double E_d;          //snapped detected energy
    double theta;
    bool elastic;        //detection at the elastic energy
    InteractionParams params;
    VecC chi;            //delta channel of C1
    MatC S1, S2;         //smooth parts of C1 and C2
    MatC D;              //delta-detection channel of C2 (elastic only)
    VecC source, proj;
    Cplx gamma_el{ 0.0, 0.0 };    //delta-channel bistatic (elastic only)
    Cplx gamma_inel{ 0.0, 0.0 };  //smooth spectral density at E_d
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
  };

  CrossedSolution solve_crossed( const LadderSolution& ladder,
                                 const CrossedConfig& cfg );

  //spectral density gamma^C_{E_d} of the coherent signal; checks that the
  //assembled value is real to 1e-8 relative
  double crossed_bistatic( const CrossedSolution& sol );

  //delta-channel coherent signal at elastic detection, with the
  //single-scattering contribution subtracted; same reality check
  double crossed_bistatic_elastic( const CrossedSolution& sol );

  struct Enhancement {
    double value = 0.0;
    bool defined = false;
  };

  //eta = (gamma^C_inel + gamma^L_inel) / gamma^L_inel; undefined when the
  //incoherent background vanishes
  Enhancement enhancement_factor( double gamma_C_inel, double gamma_L_inel );

  //incoherent spectral background gamma^L_{E_d} at theta = 0
  double ladder_inelastic_density( const LadderSolution& ladder, double E_d );

  //trapezoid nodes and weights for the detected-energy integral, dense near
  //the elastic energy (the CBS peak width is 1/k_ell); all nodes are
  //multiples of `dense` so they land on crossed-grid points
  std::pair<Vec, Vec> ed_quad_grid( double lo, double hi,
                                    double dense = 0.025,
                                    double coarse_fac = 4.0 );

  struct CrossedSpectrum {
    Vec E_d;            //detected-energy nodes
    Vec weights;
    Vec gamma_C_inel;   //coherent spectral densities
    Vec gamma_L_inel;   //incoherent background densities
    double elastic = 0.0;          //delta-channel coherent signal
    double total = 0.0;            //elastic plus integrated smooth part
    double worst_imag_rel = 0.0;   //largest reality defect encountered
  };

  //solves the crossed equations at every node of the detected-energy grid
  CrossedSpectrum crossed_spectrum( const LadderSolution& ladder,
                                    const Vec& ed_nodes, const Vec& ed_weights,
                                    const CrossedConfig& base );

  //total coherent backscattering signal gamma^C(0): the elastic channel
  //plus, for alpha > 0, the integrated inelastic spectrum
  double gamma_C_total( const LadderSolution& ladder,
                        const std::pair<Vec, Vec>& ed_quad,
                        const CrossedConfig& base );

  struct GpSweepResult {
    Vec beta;
    Vec gamma_C;
    std::optional<double> beta_star;  //sign-change location, if bracketed
  };

  //gamma^C(0) versus beta at alpha = 0 (pure mean-field nonlinearity); the
  //ladder input must be a linear (alpha = 0) solution
  GpSweepResult gp_sweep( const LadderSolution& linear_ladder,
                          const Vec& betas, double k_ell,
                          const CrossedConfig& base );

}

#endif
