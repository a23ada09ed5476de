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

#include "slabt/crossed_solver.hpp"

using namespace slabt;

namespace {

  LadderSolution linear_ladder()
  {
    LadderConfig cfg;
    cfg.params = InteractionParams( 0.0, 0.0, 10.0 );
    cfg.b = 10.0;
    cfg.Nz = 200;
    cfg.NE = 100;
    return solve_ladder( cfg );
  }

}

TEST_CASE("free theory obeys reciprocity between ladder and crossed")
{
  const LadderSolution lad = linear_ladder();
  const LadderBistatic lb = ladder_bistatic( lad );
  CHECK( lb.total == doctest::Approx( 3.48834137 ).epsilon( 1e-6 ) );
  CHECK( lb.single == doctest::Approx( 0.49979173 ).epsilon( 1e-6 ) );

  CrossedConfig cc;
  cc.params = InteractionParams( 0.0, 0.0, 10.0 );
  cc.E_d = kEi;
  const CrossedSolution cr = solve_crossed( lad, cc );
  CHECK( cr.converged );
  CHECK( cr.elastic );
  //without couplings the smooth channels are never excited
  CHECK( cr.S1.cwiseAbs().maxCoeff() == 0.0 );
  CHECK( cr.S2.cwiseAbs().maxCoeff() == 0.0 );
  CHECK( cr.D.cwiseAbs().maxCoeff() == 0.0 );

  const double gC = crossed_bistatic_elastic( cr );
  CHECK( gC == doctest::Approx( 2.98854964 ).epsilon( 1e-6 ) );
  //the crossed signal equals the ladder one minus single scattering
  CHECK( std::abs( gC - ( lb.total - lb.single ) ) / lb.total < 1e-9 );
  //reality of the delta channel
  CHECK( std::abs( cr.gamma_el.imag() )
         <= 1e-10 * std::abs( cr.gamma_el.real() ) );
}

TEST_CASE("mean field dephases the crossed channel and flips its sign")
{
  const LadderSolution lad = linear_ladder();
  Vec betas( 2 );
  betas << 0.10, 0.12;
  const GpSweepResult gp = gp_sweep( lad, betas, 10.0, CrossedConfig{} );
  CHECK( gp.gamma_C[0] == doctest::Approx( 0.066362 ).epsilon( 1e-3 ) );
  CHECK( gp.gamma_C[1] == doctest::Approx( -0.036172 ).epsilon( 1e-3 ) );
  REQUIRE( gp.beta_star.has_value() );
  CHECK( *gp.beta_star == doctest::Approx( 0.11295 ).epsilon( 5e-3 ) );

  //a sweep with no sign change brackets nothing
  Vec small( 2 );
  small << 0.01, 0.02;
  const GpSweepResult none = gp_sweep( lad, small, 10.0, CrossedConfig{} );
  CHECK( !none.beta_star.has_value() );
  CHECK( none.gamma_C.minCoeff() > 0.0 );

  //the sweep is defined on the free ladder only
  LadderConfig icfg;
  icfg.params = InteractionParams( 0.02, 0.2, 10.0 );
  icfg.NE = 40;
  icfg.b = 5.0;
  icfg.Nz = 100;
  const LadderSolution inter = solve_ladder( icfg );
  CHECK_THROWS_AS( gp_sweep( inter, betas, 10.0, CrossedConfig{} ),
                   DomainError );
}

TEST_CASE("interacting crossed solve at inelastic detection")
{
  LadderConfig lcfg;
  lcfg.params = InteractionParams( 0.02, 0.2, 10.0 );
  lcfg.b = 10.0;
  lcfg.Nz = 200;
  lcfg.NE = 60;
  const LadderSolution lad = solve_ladder( lcfg );

  CrossedConfig cc;
  cc.params = lad.params;
  cc.E_d = 0.9;
  const CrossedSolution cr = solve_crossed( lad, cc );
  CHECK( cr.converged );
  CHECK( !cr.elastic );
  CHECK( cr.E_d == doctest::Approx( 0.9 ).epsilon( 1e-12 ) );
  CHECK( cr.S1.cwiseAbs().maxCoeff() > 0.0 );
  CHECK( cr.S2.cwiseAbs().maxCoeff() > 0.0 );
  CHECK( cr.D.size() == 0 );
  CHECK_THROWS_AS( crossed_bistatic_elastic( cr ), DomainError );

  //the smooth coherent density is real up to the solver tolerance and small
  //against the incoherent background
  const double gc = crossed_bistatic( cr );
  const double gl = ladder_inelastic_density( lad, cr.E_d );
  CHECK( gl > 0.0 );
  const Enhancement eta = enhancement_factor( gc, gl );
  CHECK( eta.defined );
  CHECK( std::isfinite( eta.value ) );

  CHECK_THROWS_AS( ladder_inelastic_density( lad, -1.0 ), DomainError );
}

TEST_CASE("enhancement factor guards its domain")
{
  CHECK( !enhancement_factor( 0.1, 0.0 ).defined );
  CHECK( !enhancement_factor( 0.1, -1.0 ).defined );
  const Enhancement e = enhancement_factor( 0.5, 1.0 );
  CHECK( e.defined );
  CHECK( e.value == doctest::Approx( 1.5 ).epsilon( 1e-15 ) );
}

TEST_CASE("detected-energy quadrature grid")
{
  const auto [x, w] = ed_quad_grid( 0.3, 2.0, 0.025, 4.0 );
  REQUIRE( x.size() == w.size() );
  REQUIRE( x.size() > 10 );
  CHECK( x[0] == doctest::Approx( 0.3 ).epsilon( 1e-14 ) );
  CHECK( x[x.size() - 1] == doctest::Approx( 2.0 ).epsilon( 1e-14 ) );
  //trapezoid weights integrate 1 exactly over the span
  CHECK( w.sum() == doctest::Approx( 1.7 ).epsilon( 1e-12 ) );
  double prev_step = 0.0;
  for ( Index i = 0; i + 1 < x.size(); ++i ) {
    const double step = x[i + 1] - x[i];
    CHECK( step > 0.0 );
    //all nodes sit on the dense lattice
    CHECK( std::abs( x[i] / 0.025 - std::round( x[i] / 0.025 ) ) < 1e-9 );
    //dense sampling across the elastic peak, coarse in the tails
    if ( std::abs( x[i] - kEi ) < 0.3 )
      CHECK( step == doctest::Approx( 0.025 ).epsilon( 1e-9 ) );
    prev_step = step;
  }
  (void)prev_step;
  CHECK_THROWS_AS( ed_quad_grid( -1.0, 2.0 ), DomainError );
  CHECK_THROWS_AS( ed_quad_grid( 2.0, 1.0 ), DomainError );
}
