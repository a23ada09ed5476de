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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "slabt/ladder_solver.hpp"

using namespace slabt;

namespace {

  LadderConfig interacting_config()
  {
    LadderConfig cfg;
    cfg.params = InteractionParams( 0.02, 0.0, 10.0 );
    cfg.b = 10.0;
    cfg.Nz = 200;
    cfg.NE = 60;
    cfg.E_max = 5.0;
    cfg.damping = 0.5;
    cfg.tol = 1e-8;
    return cfg;
  }

}

TEST_CASE("free theory reduces to the linear transport solution")
{
  LadderConfig cfg;
  cfg.params = InteractionParams( 0.0, 0.0, 10.0 );
  cfg.b = 10.0;
  cfg.Nz = 100;
  const LadderSolution sol = solve_ladder( cfg );
  CHECK( sol.converged );
  CHECK( sol.iterations == 0 );
  CHECK( ( sol.field.elastic - sol.J_linear ).cwiseAbs().maxCoeff() == 0.0 );
  CHECK( sol.field.smooth.cwiseAbs().maxCoeff() == 0.0 );
  CHECK( sol.J_linear.minCoeff() > 0.0 );
  //J = I0 + K J
  const Vec resid = sol.I0 + sol.K * sol.J_linear - sol.J_linear;
  CHECK( resid.cwiseAbs().maxCoeff() < 1e-12 );
  CHECK( flux_closure( sol ) == doctest::Approx( 1.0 ).epsilon( 0.005 ) );
}

TEST_CASE("interacting slab: conservation, thermalization, observables")
{
  const LadderSolution sol = solve_ladder( interacting_config() );
  CHECK( sol.converged );
  CHECK( sol.iterations > 0 );
  CHECK( sol.residual < 1e-8 );
  CHECK( sol.residual_history.size() == std::size_t( sol.iterations ) );

  //conservative tables keep both flux identities at rounding level,
  //independent of the energy resolution
  const FluxProfiles fp = flux_profiles( sol );
  const double relJ = ( ( fp.J - sol.J_linear ).cwiseAbs()
                        .cwiseQuotient( sol.J_linear ) ).maxCoeff();
  const double relK = ( ( fp.K_energy - kEi * fp.J ).cwiseAbs()
                        .cwiseQuotient( fp.J ) ).maxCoeff() / kEi;
  CHECK( relJ < 1e-10 );
  CHECK( relK < 1e-10 );

  //fields stay physical
  CHECK( sol.field.elastic.minCoeff() >= 0.0 );
  CHECK( sol.field.smooth.minCoeff()
         >= -1e-6 * sol.field.smooth.maxCoeff() );

  //the inelastic channel dominates in the deep half of the slab
  for ( Index i = 0; i < sol.zg.Nz; ++i )
    if ( sol.zg.z[i] >= 5.0 )
      CHECK( fp.J_inel[i] / fp.J[i] > 0.5 );

  //normalized spectrum, marching towards the thermal profile with depth
  const Vec F = spectral_distribution( sol, 5.0 );
  CHECK( sol.eg.w.dot( F ) == doctest::Approx( 1.0 ).epsilon( 1e-12 ) );
  CHECK( F.minCoeff() >= 0.0 );
  const double l1q = thermal_l1_distance( sol, 2.5 );
  const double l1f = thermal_l1_distance( sol, 10.0 );
  CHECK( l1f < l1q );
  CHECK( l1f < 0.3 );

  CHECK( flux_closure( sol ) == doctest::Approx( 1.0 ).epsilon( 0.002 ) );

  const LadderBistatic lb = ladder_bistatic( sol );
  CHECK( lb.total == doctest::Approx( lb.elastic + lb.inelastic )
         .epsilon( 1e-14 ) );
  CHECK( lb.single == doctest::Approx( 0.49979 ).epsilon( 1e-3 ) );
  CHECK( lb.total > lb.single );
  CHECK( lb.gamma_E.minCoeff() >= 0.0 );
  CHECK( lb.inelastic > 0.0 );
  CHECK_THROWS_AS( ladder_bistatic( sol, M_PI / 2 ), DomainError );

  CHECK_THROWS_AS( spectral_distribution( sol, -1.0 ), DomainError );
  CHECK_THROWS_AS( spectral_distribution( sol, 11.0 ), DomainError );
}

TEST_CASE("iteration budget is enforced")
{
  LadderConfig cfg = interacting_config();
  cfg.NE = 20;
  cfg.max_iters = 3;
  CHECK_THROWS_AS( solve_ladder( cfg ), ConvergenceError );
}

TEST_CASE("configuration is validated up front")
{
  LadderConfig cfg = interacting_config();
  cfg.damping = 0.0;
  CHECK_THROWS_AS( solve_ladder( cfg ), DomainError );
  cfg = interacting_config();
  cfg.tol = -1.0;
  CHECK_THROWS_AS( solve_ladder( cfg ), DomainError );
  cfg = interacting_config();
  cfg.NE = 7;  //E_i misses the energy nodes
  CHECK_THROWS_AS( solve_ladder( cfg ), DomainError );
}

TEST_CASE("iteration log fires")
{
  LadderConfig cfg = interacting_config();
  cfg.NE = 20;
  cfg.tol = 1e-4;
  int calls = 0;
  cfg.log = [&]( int, double, double ) { ++calls; };
  cfg.log_every = 10;
  solve_ladder( cfg );
  CHECK( calls > 1 );
}
