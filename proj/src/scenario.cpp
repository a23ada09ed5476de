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
#include "slabt/scenario.hpp"
#include "json.hpp"
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace slabt {

  namespace {

    using nlohmann::json;

    // ---------- config plumbing ----------

    const std::vector<std::string>& known_keys()
    {
      static const std::vector<std::string> k = {
        "alpha", "beta", "k_ell", "b", "Nz", "NE", "E_max", "damping",
        "tol", "max_iters", "crossed_target_h", "crossed_tol",
        "crossed_max_iters", "threads", "seed", "scenario", "output_dir"
      };
      return k;
    }

    std::string trim( const std::string& s )
    {
      const auto a = s.find_first_not_of( " \t\r\n" );
      if ( a == std::string::npos )
        return {};
      const auto b = s.find_last_not_of( " \t\r\n" );
      return s.substr( a, b - a + 1 );
    }

    double parse_double( const std::string& key, const std::string& v )
    {
      std::size_t pos = 0;
      double out = 0.0;
      try {
        out = std::stod( v, &pos );
      } catch ( const std::exception& ) {
        pos = 0;
      }
      if ( pos != v.size() || v.empty() )
        throw DomainError( "cannot parse value '" + v + "' for key '"
                           + key + "'" );
      return out;
    }

    long parse_long( const std::string& key, const std::string& v )
    {
      std::size_t pos = 0;
      long out = 0;
      try {
        out = std::stol( v, &pos );
      } catch ( const std::exception& ) {
        pos = 0;
      }
      if ( pos != v.size() || v.empty() )
        throw DomainError( "cannot parse value '" + v + "' for key '"
                           + key + "' (expected an integer)" );
      return out;
    }

    // ---------- serialization ----------

    std::string fmt12( double v )
    {
      if ( !std::isfinite( v ) )
        throw ConsistencyError("non-finite number reached the output layer");
      char buf[32];
      std::snprintf( buf, sizeof buf, "%.12g", v );
      return buf;
    }

    //rounds through the 12-significant-digit text form so serialized JSON
    //scalars match the CSV convention
    double round12( double v )
    {
      return std::stod( fmt12( v ) );
    }

    std::uint64_t fnv1a64( const std::string& bytes )
    {
      std::uint64_t h = 1469598103934665603ull;
      for ( unsigned char c : bytes ) {
        h ^= c;
        h *= 1099511628211ull;
      }
      return h;
    }

    std::string hex64( std::uint64_t v )
    {
      char buf[24];
      std::snprintf( buf, sizeof buf, "%016llx",
                     static_cast<unsigned long long>( v ) );
      return buf;
    }

    struct Emitter {
      std::filesystem::path dir;
      struct FileInfo {
        std::string name;
        std::size_t bytes;
        std::uint64_t checksum;
      };
      std::vector<FileInfo> files;
      int curve_count = 0;

      void write_bytes( const std::string& name, const std::string& bytes )
      {
        std::ofstream f( dir / name, std::ios::binary | std::ios::trunc );
        if ( !f || !( f << bytes ) )
          throw Error( "cannot write output file " + ( dir / name ).string() );
        files.push_back( { name, bytes.size(), fnv1a64( bytes ) } );
      }

      void csv( const std::string& name,
                const std::vector<std::pair<std::string, Vec>>& cols )
      {
        if ( cols.empty() )
          throw ConsistencyError("csv with no columns");
        const Index n = cols.front().second.size();
        std::string out;
        for ( std::size_t c = 0; c < cols.size(); ++c ) {
          if ( cols[c].second.size() != n )
            throw ConsistencyError( "csv column length mismatch in " + name );
          out += ( c ? "," : "" ) + cols[c].first;
        }
        out += '\n';
        for ( Index r = 0; r < n; ++r ) {
          for ( std::size_t c = 0; c < cols.size(); ++c ) {
            if ( c )
              out += ',';
            out += fmt12( cols[c].second[r] );
          }
          out += '\n';
        }
        ++curve_count;
        write_bytes( name, out );
      }

      void json_file( const std::string& name, const json& j )
      {
        write_bytes( name, j.dump( 2 ) + "\n" );
      }
    };

    struct Stages {
      std::vector<std::pair<std::string, double>> seconds;
      bool verbose = false;

      template<class F>
      decltype(auto) run( const std::string& name, F&& f )
      {
        if ( verbose )
          std::cerr << "[slabt] " << name << "...\n";
        const auto t0 = std::chrono::steady_clock::now();
        auto record = [&] {
          const double s = std::chrono::duration<double>(
            std::chrono::steady_clock::now() - t0 ).count();
          seconds.emplace_back( name, s );
          if ( verbose )
            std::cerr << "[slabt] " << name << " done in "
                      << fmt12( s ) << " s\n";
        };
        if constexpr ( std::is_void_v<std::invoke_result_t<F&>> ) {
          f();
          record();
        } else {
          auto r = f();
          record();
          return r;
        }
      }
    };

    struct CheckSet {
      bool passed = true;
      std::vector<std::string> failures;
      json report = json::object();

      void require( const std::string& name, bool ok,
                    const std::string& what )
      {
        report[name] = ok;
        if ( !ok ) {
          passed = false;
          failures.push_back( name + ": " + what );
        }
      }
    };

    // ---------- shared pieces ----------

    IterationLog stage_log( const char* tag, bool verbose )
    {
      if ( !verbose )
        return {};
      std::string t = tag;
      return [t]( int it, double res, double secs ) {
        std::fprintf( stderr, "  [%s] iteration %d residual %.3e (%.0f s)\n",
                      t.c_str(), it, res, secs );
      };
    }

    LadderConfig ladder_config( const RunConfig& c )
    {
      LadderConfig lc;
      lc.params = InteractionParams( c.alpha, c.beta, c.k_ell );
      lc.b = c.b;
      lc.Nz = c.Nz;
      lc.NE = c.NE;
      lc.E_max = c.E_max;
      lc.damping = c.damping;
      lc.tol = c.tol;
      lc.max_iters = c.max_iters;
      lc.log = stage_log( "ladder", c.verbose );
      lc.log_every = 2000;
      return lc;
    }

    CrossedConfig crossed_config( const RunConfig& c )
    {
      CrossedConfig cc;
      cc.params = InteractionParams( c.alpha, c.beta, c.k_ell );
      cc.target_h = c.crossed_target_h;
      cc.tol = c.crossed_tol;
      cc.max_iters = c.crossed_max_iters;
      return cc;
    }

    json solve_summary( int iterations, double residual )
    {
      return json{ { "iterations", iterations },
                   { "residual", round12( residual ) } };
    }

    //thermal fixed-point residual of the continuum collision operator,
    //worst case over a spread of observation energies
    double mb_worst( const InteractionParams& p )
    {
      double worst = 0.0;
      for ( double Eo : { 0.11, 0.5, 0.97, 1.0, 1.03, 1.5, 2.0, 3.0, 4.5 } )
        worst = std::max( worst, mb_collision_residual( Eo, 40.0, p ) );
      return worst;
    }

    Vec trapezoid_weights( const Vec& x )
    {
      Vec w = Vec::Zero( x.size() );
      for ( Index i = 0; i + 1 < x.size(); ++i ) {
        w[i] += 0.5 * ( x[i + 1] - x[i] );
        w[i + 1] += 0.5 * ( x[i + 1] - x[i] );
      }
      return w;
    }

    // ---------- scenarios ----------

    void scenario_fig9a( RunConfig& c, Emitter& em, Stages& st, json& sum,
                         CheckSet& ck )
    {
      if ( !c.is_set( "alpha" ) ) c.alpha = 0.01;
      if ( !c.is_set( "b" ) ) c.b = 40.0;
      if ( !c.is_set( "Nz" ) ) c.Nz = 400;
      const LadderSolution sol =
        st.run( "ladder", [&] { return solve_ladder( ladder_config( c ) ); } );
      const FluxProfiles fp = flux_profiles( sol );
      const Vec relJ = ( fp.J - sol.J_linear ).cwiseAbs()
        .cwiseQuotient( sol.J_linear );
      const Vec relK = ( fp.K_energy - kEi * fp.J ).cwiseAbs()
        .cwiseQuotient( kEi * fp.J );
      em.csv( "flux_decomposition.csv",
              { { "z", sol.zg.z }, { "J_total", fp.J },
                { "J_elastic", fp.J_el }, { "J_inelastic", fp.J_inel },
                { "J_linear", sol.J_linear } } );
      sum["sup_rel_flux_defect"] = round12( relJ.maxCoeff() );
      sum["sup_rel_energy_flux_defect"] = round12( relK.maxCoeff() );
      sum["flux_closure"] = round12( flux_closure( sol ) );
      sum["convergence"]["ladder"] = solve_summary( sol.iterations,
                                                    sol.residual );
      ck.require( "total_flux_matches_linear", relJ.maxCoeff() <= 1e-3,
                  "sup |J - J_linear|/J_linear = " + fmt12( relJ.maxCoeff() )
                  + " exceeds 1e-3" );
      ck.require( "energy_flux_matches_linear", relK.maxCoeff() <= 1e-3,
                  "sup |K - E_i J|/(E_i J) = " + fmt12( relK.maxCoeff() )
                  + " exceeds 1e-3" );
    }

    void scenario_fig9b( RunConfig& c, Emitter& em, Stages& st, json& sum,
                         CheckSet& ck )
    {
      if ( !c.is_set( "alpha" ) ) c.alpha = 0.01;
      if ( !c.is_set( "b" ) ) c.b = 40.0;
      if ( !c.is_set( "Nz" ) ) c.Nz = 400;
      const LadderSolution sol =
        st.run( "ladder", [&] { return solve_ladder( ladder_config( c ) ); } );
      const double qd = 0.25 * c.b, hd = 0.5 * c.b, td = 0.75 * c.b;
      const Vec thermal =
        ( 4.0 / ( kEi * kEi ) * sol.eg.E.array()
          * ( -2.0 * sol.eg.E.array() / kEi ).exp() ).matrix();
      em.csv( "depth_spectra.csv",
              { { "E", sol.eg.E },
                { "F_quarter_depth", spectral_distribution( sol, qd ) },
                { "F_mid_depth", spectral_distribution( sol, hd ) },
                { "F_three_quarter_depth", spectral_distribution( sol, td ) },
                { "F_full_depth", spectral_distribution( sol, c.b ) },
                { "F_thermal", thermal } } );
      const double l1q = thermal_l1_distance( sol, qd );
      const double l1f = thermal_l1_distance( sol, c.b );
      sum["thermal_l1_quarter_depth"] = round12( l1q );
      sum["thermal_l1_mid_depth"] = round12( thermal_l1_distance( sol, hd ) );
      sum["thermal_l1_three_quarter_depth"] =
        round12( thermal_l1_distance( sol, td ) );
      sum["thermal_l1_full_depth"] = round12( l1f );
      const double mb = st.run( "thermal_fixed_point", [&] {
        return mb_worst( InteractionParams( c.alpha, c.beta, c.k_ell ) );
      } );
      sum["mb_residual_max"] = round12( mb );
      sum["convergence"]["ladder"] = solve_summary( sol.iterations,
                                                    sol.residual );
      ck.require( "thermalized_at_quarter_depth", l1q <= 0.05,
                  "L1 distance to thermal at b/4 = " + fmt12( l1q )
                  + " exceeds 0.05" );
      ck.require( "thermalized_at_full_depth", l1f <= 0.05,
                  "L1 distance to thermal at b = " + fmt12( l1f )
                  + " exceeds 0.05" );
      ck.require( "thermal_fixed_point", mb <= 1e-4,
                  "collision-operator residual on the thermal profile = "
                  + fmt12( mb ) + " exceeds 1e-4" );
    }

    void scenario_fig10a( RunConfig& c, Emitter& em, Stages& st, json& sum,
                          CheckSet& ck )
    {
      Vec betas( 13 );
      betas << 0.005, 0.01, 0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14,
        0.16, 0.20, 0.25, 0.30;

      RunConfig lin = c;
      lin.alpha = 0.0;
      lin.beta = 0.0;
      const LadderSolution lad0 = st.run( "linear_ladder", [&] {
        return solve_ladder( ladder_config( lin ) );
      } );
      const GpSweepResult gp = st.run( "mean_field_sweep", [&] {
        return gp_sweep( lad0, betas, c.k_ell, crossed_config( lin ) );
      } );

      //interacting branch: alpha tied to beta/10, total signal integrated
      //over the detected energy
      const auto eds = ed_quad_grid( 0.3, 2.0, 0.025, 4.0 );
      Vec gL( betas.size() ), gLinel( betas.size() ), gC1( betas.size() );
      int iter_max = 0;
      double res_max = 0.0;
      st.run( "interacting_sweep", [&] {
        for ( Index i = 0; i < betas.size(); ++i ) {
          RunConfig ci = c;
          ci.beta = betas[i];
          ci.alpha = betas[i] / 10.0;
          const LadderSolution lad = solve_ladder( ladder_config( ci ) );
          iter_max = std::max( iter_max, lad.iterations );
          res_max = std::max( res_max, lad.residual );
          const LadderBistatic lb = ladder_bistatic( lad );
          gL[i] = lb.total;
          gLinel[i] = lb.inelastic;
          gC1[i] = gamma_C_total( lad, eds, crossed_config( ci ) );
          if ( c.verbose )
            std::cerr << "  [sweep] beta " << fmt12( betas[i] )
                      << "  gamma_C(alpha=0) " << fmt12( gp.gamma_C[i] )
                      << "  gamma_C(alpha=beta/10) " << fmt12( gC1[i] )
                      << "\n";
        }
      } );

      em.csv( "gp_crossover.csv",
              { { "beta", betas }, { "gamma_L", gL },
                { "gamma_C_alpha0", gp.gamma_C },
                { "gamma_C_alphaBover10", gC1 },
                { "gamma_L_inel", gLinel } } );
      if ( gp.beta_star )
        sum["beta_star"] = round12( *gp.beta_star );
      else
        sum["beta_star"] = nullptr;
      sum["beta_star_bracketed"] = gp.beta_star.has_value();
      sum["convergence"]["linear_ladder"] =
        solve_summary( lad0.iterations, lad0.residual );
      sum["convergence"]["interacting_ladders"] =
        json{ { "iterations_max", iter_max },
              { "residual_max", round12( res_max ) } };

      ck.require( "mean_field_crossover_in_window",
                  gp.beta_star && *gp.beta_star >= 0.11
                  && *gp.beta_star <= 0.15,
                  gp.beta_star
                  ? "beta* = " + fmt12( *gp.beta_star )
                  + " outside [0.11, 0.15]"
                  : "no sign change of gamma_C(0) in the sweep" );
      bool below_small = true, above_large = true, no_sign_change = true;
      for ( Index i = 0; i < betas.size(); ++i ) {
        if ( betas[i] < 0.1 && gC1[i] >= gp.gamma_C[i] )
          below_small = false;
        if ( betas[i] >= 0.1 && betas[i] <= 0.2
             && gC1[i] <= gp.gamma_C[i] )
          above_large = false;
        if ( betas[i] <= 0.2 && gC1[i] * gC1[0] <= 0.0 )
          no_sign_change = false;
      }
      ck.require( "interacting_below_mean_field_at_small_beta", below_small,
                  "gamma_C(alpha=beta/10) is not below the alpha=0 curve for"
                  " all beta < 0.1" );
      ck.require( "interacting_above_mean_field_from_beta_0.1", above_large,
                  "gamma_C(alpha=beta/10) is not above the alpha=0 curve for"
                  " all beta in [0.1, 0.2]" );
      ck.require( "interacting_keeps_sign_to_beta_0.2", no_sign_change,
                  "gamma_C(alpha=beta/10) changes sign before beta = 0.2" );
    }

    void scenario_fig10b( RunConfig& c, Emitter& em, Stages& st, json& sum,
                          CheckSet& ck )
    {
      if ( !c.is_set( "beta" ) ) c.beta = 0.2;
      if ( !c.is_set( "alpha" ) ) c.alpha = c.beta / 10.0;
      const LadderSolution lad =
        st.run( "ladder", [&] { return solve_ladder( ladder_config( c ) ); } );

      //detected-energy scan, dense across the near-elastic peak
      std::vector<double> ed;
      for ( int k = 0; k < 4; ++k )
        ed.push_back( 0.3 + 0.1 * k );
      for ( int k = 0; k <= 24; ++k )
        ed.push_back( 0.70 + 0.025 * k );
      for ( int k = 0; k < 9; ++k )
        ed.push_back( 1.35 + 0.1 * k );
      const Vec Eds = Eigen::Map<Vec>( ed.data(), Index( ed.size() ) );
      const CrossedSpectrum sp = st.run( "crossed_scan", [&] {
        return crossed_spectrum( lad, Eds, trapezoid_weights( Eds ),
                                 crossed_config( c ) );
      } );

      Vec eta( Eds.size() );
      for ( Index i = 0; i < Eds.size(); ++i ) {
        const Enhancement e = enhancement_factor( sp.gamma_C_inel[i],
                                                  sp.gamma_L_inel[i] );
        if ( !e.defined )
          throw ConsistencyError( "vanishing incoherent background at E_d = "
                                  + fmt12( Eds[i] ) );
        eta[i] = e.value;
      }
      em.csv( "spectral_enhancement.csv",
              { { "E_d", Eds }, { "gamma_C_inel", sp.gamma_C_inel },
                { "gamma_L_inel", sp.gamma_L_inel }, { "eta", eta } } );

      Index je = 0, jc = 0;
      eta.maxCoeff( &je );
      sp.gamma_C_inel.maxCoeff( &jc );
      const double half = 0.5 * sp.gamma_C_inel[jc];
      double left = Eds[0], right = Eds[Eds.size() - 1];
      for ( Index i = jc; i-- > 0; )
        if ( sp.gamma_C_inel[i] <= half ) {
          left = Eds[i] + ( Eds[i + 1] - Eds[i] )
            * ( half - sp.gamma_C_inel[i] )
            / ( sp.gamma_C_inel[i + 1] - sp.gamma_C_inel[i] );
          break;
        }
      for ( Index i = jc + 1; i < Eds.size(); ++i )
        if ( sp.gamma_C_inel[i] <= half ) {
          right = Eds[i - 1] + ( Eds[i] - Eds[i - 1] )
            * ( sp.gamma_C_inel[i - 1] - half )
            / ( sp.gamma_C_inel[i - 1] - sp.gamma_C_inel[i] );
          break;
        }
      const double fwhm = right - left;

      sum["eta_max"] = round12( eta[je] );
      sum["eta_peak_E_d"] = round12( Eds[je] );
      sum["gamma_C_peak_E_d"] = round12( Eds[jc] );
      sum["gamma_C_fwhm"] = round12( fwhm );
      sum["gamma_C_elastic"] = round12( sp.elastic );
      sum["gamma_C_total"] = round12( sp.total );
      sum["worst_imag_rel"] = round12( sp.worst_imag_rel );
      sum["convergence"]["ladder"] = solve_summary( lad.iterations,
                                                    lad.residual );

      ck.require( "enhancement_exceeds_two", eta[je] > 2.0,
                  "max eta = " + fmt12( eta[je] ) + " is not above 2" );
      ck.require( "enhancement_peak_near_elastic",
                  std::abs( Eds[je] - kEi ) / kEi <= 0.3,
                  "eta peak at E_d = " + fmt12( Eds[je] )
                  + " outside |E_d - E_i|/E_i <= 0.3" );
      ck.require( "peak_width_matches_dephasing_scale",
                  fwhm >= 0.05 && fwhm <= 0.2,
                  "gamma_C FWHM = " + fmt12( fwhm )
                  + " outside [0.05, 0.2] (factor 2 around 1/k_ell)" );
    }

    void scenario_conservation( RunConfig& c, Emitter&, Stages& st,
                                json& sum, CheckSet& ck )
    {
      const InteractionParams p( c.alpha, c.beta, c.k_ell );
      const Quadrature quad;

      double pmax = 0.0, emax = 0.0;
      st.run( "kernel_conservation", [&] {
        const Vec Es = Vec::LinSpaced( 20, 0.2, 3.0 );
        for ( Index i = 0; i < 20; ++i )
          for ( Index j = 0; j < 20; ++j ) {
            pmax = std::max( pmax, std::abs(
              check_particle_conservation( Es[i], Es[j], p, quad ) ) );
            emax = std::max( emax, std::abs(
              check_energy_conservation( Es[i], Es[j], p, quad ) ) );
          }
      } );

      double rmax = 0.0;
      st.run( "reversibility", [&] {
        std::mt19937_64 rng( 7 );
        std::uniform_real_distribution<double> u( 0.05, 4.0 );
        for ( int k = 0; k < 1000; ++k ) {
          const double E1 = u( rng ), E2 = u( rng ), E3 = u( rng );
          rmax = std::max( rmax, std::abs(
            check_reversibility( E1, E2, E3, p ) ) );
        }
      } );

      //elastic point: the loss kernel is -(4/3) alpha in closed form and the
      //particle identity then pins the gain integral to (4/3) alpha sqrt(E_i)
      const double spot_g =
        std::abs( ladder_g( kEi, kEi, p ) + 4.0 / 3.0 * p.alpha );
      const double spot_f =
        std::abs( check_particle_conservation( kEi, kEi, p, quad ) );

      const double mb = st.run( "thermal_fixed_point",
                                [&] { return mb_worst( p ); } );

      sum["particle_residual_max"] = round12( pmax );
      sum["energy_residual_max"] = round12( emax );
      sum["reversibility_residual_max"] = round12( rmax );
      sum["elastic_loss_defect"] = round12( spot_g );
      sum["elastic_gain_defect"] = round12( spot_f );
      sum["mb_residual_max"] = round12( mb );
      sum["convergence"] = json::object();

      ck.require( "particle_flux_conserved", pmax <= 1e-6 * c.alpha,
                  "particle residual " + fmt12( pmax ) + " exceeds 1e-6*alpha" );
      ck.require( "energy_flux_conserved", emax <= 1e-6 * c.alpha,
                  "energy residual " + fmt12( emax ) + " exceeds 1e-6*alpha" );
      ck.require( "reversibility", rmax <= 1e-14,
                  "reversibility residual " + fmt12( rmax )
                  + " exceeds 1e-14" );
      ck.require( "elastic_point_closed_form",
                  spot_g <= 1e-8 && spot_f <= 1e-8,
                  "elastic-point defects " + fmt12( spot_g ) + ", "
                  + fmt12( spot_f ) + " exceed 1e-8" );
      ck.require( "thermal_fixed_point", mb <= 1e-4,
                  "collision-operator residual on the thermal profile = "
                  + fmt12( mb ) + " exceeds 1e-4" );
    }

    void scenario_linear_cbs( RunConfig& c, Emitter&, Stages& st, json& sum,
                              CheckSet& ck )
    {
      if ( c.is_set( "alpha" ) && c.alpha != 0.0 )
        throw DomainError("linear-cbs is defined at alpha = 0");
      if ( c.is_set( "beta" ) && c.beta != 0.0 )
        throw DomainError("linear-cbs is defined at beta = 0");
      c.alpha = 0.0;
      c.beta = 0.0;
      const LadderSolution lad =
        st.run( "ladder", [&] { return solve_ladder( ladder_config( c ) ); } );
      const LadderBistatic lb = ladder_bistatic( lad );
      CrossedConfig cc = crossed_config( c );
      cc.E_d = kEi;
      const CrossedSolution cr =
        st.run( "crossed", [&] { return solve_crossed( lad, cc ); } );
      const double gC = crossed_bistatic_elastic( cr );
      const double rel = std::abs( gC - ( lb.total - lb.single ) ) / lb.total;

      sum["gamma_L"] = round12( lb.total );
      sum["gamma_L_single"] = round12( lb.single );
      sum["gamma_C"] = round12( gC );
      sum["reciprocity_defect"] = round12( rel );
      sum["convergence"]["ladder"] = solve_summary( lad.iterations,
                                                    lad.residual );
      sum["convergence"]["crossed"] = solve_summary( cr.iterations,
                                                     cr.residual );
      ck.require( "reciprocity", rel <= 1e-3,
                  "relative defect " + fmt12( rel ) + " exceeds 1e-3" );
    }

    json config_echo( const RunConfig& c )
    {
      json j;
      j["alpha"] = c.alpha;
      j["beta"] = c.beta;
      j["k_ell"] = c.k_ell;
      j["b"] = c.b;
      j["Nz"] = c.Nz;
      j["NE"] = c.NE;
      j["E_max"] = c.E_max;
      j["damping"] = c.damping;
      j["tol"] = c.tol;
      j["max_iters"] = c.max_iters;
      j["crossed_target_h"] = c.crossed_target_h;
      j["crossed_tol"] = c.crossed_tol;
      j["crossed_max_iters"] = c.crossed_max_iters;
      j["threads"] = c.threads;
      j["seed"] = c.seed;
      j["scenario"] = c.scenario;
      j["output_dir"] = c.output_dir;
      j["check"] = c.check;
      j["verbose"] = c.verbose;
      return j;
    }

  }

  // ---------- public API ----------

  void RunConfig::set( const std::string& key, const std::string& value )
  {
    if ( key == "alpha" ) alpha = parse_double( key, value );
    else if ( key == "beta" ) beta = parse_double( key, value );
    else if ( key == "k_ell" ) k_ell = parse_double( key, value );
    else if ( key == "b" ) b = parse_double( key, value );
    else if ( key == "Nz" ) Nz = Index( parse_long( key, value ) );
    else if ( key == "NE" ) NE = Index( parse_long( key, value ) );
    else if ( key == "E_max" ) E_max = parse_double( key, value );
    else if ( key == "damping" ) damping = parse_double( key, value );
    else if ( key == "tol" ) tol = parse_double( key, value );
    else if ( key == "max_iters" )
      max_iters = int( parse_long( key, value ) );
    else if ( key == "crossed_target_h" )
      crossed_target_h = parse_double( key, value );
    else if ( key == "crossed_tol" )
      crossed_tol = parse_double( key, value );
    else if ( key == "crossed_max_iters" )
      crossed_max_iters = int( parse_long( key, value ) );
    else if ( key == "threads" ) threads = int( parse_long( key, value ) );
    else if ( key == "seed" ) seed = parse_long( key, value );
    else if ( key == "scenario" ) scenario = value;
    else if ( key == "output_dir" ) output_dir = value;
    else
      throw DomainError( "unknown configuration key '" + key + "'" );
    touched.insert( key );
  }

  void RunConfig::validate() const
  {
    auto fail = []( const std::string& what ) {
      throw DomainError( "configuration constraint violated: " + what );
    };
    if ( !( alpha >= 0.0 ) ) fail("alpha must be >= 0");
    if ( !( beta >= 0.0 ) ) fail("beta must be >= 0");
    if ( alpha > 0.0 && beta > 0.0 && !( beta > alpha ) )
      fail("beta must exceed alpha when both are nonzero");
    if ( !( k_ell > 1.0 ) ) fail("k_ell must be > 1 (weak disorder)");
    if ( !( b > 0.0 ) ) fail("b must be positive");
    if ( Nz < 1 ) fail("Nz must be >= 1");
    if ( NE < 2 ) fail("NE must be >= 2");
    if ( !( E_max > kEi ) ) fail("E_max must exceed the injection energy");
    if ( !( damping > 0.0 && damping <= 1.0 ) )
      fail("damping must lie in (0, 1]");
    if ( !( tol > 0.0 ) || !( crossed_tol > 0.0 ) )
      fail("tolerances must be positive");
    if ( max_iters < 1 || crossed_max_iters < 1 )
      fail("iteration budgets must be positive");
    if ( !( crossed_target_h > 0.0 ) )
      fail("crossed_target_h must be positive");
    if ( threads < 1 ) fail("threads must be >= 1");
    if ( seed < 0 ) fail("seed must be >= 0");
    if ( !scenario.empty() ) {
      const auto& names = scenario_names();
      if ( std::find( names.begin(), names.end(), scenario ) == names.end() )
        fail( "unknown scenario '" + scenario + "'" );
    }
  }

  RunConfig load_config( const std::string& path )
  {
    std::ifstream f( path );
    if ( !f )
      throw DomainError( "cannot read configuration file '" + path + "'" );
    RunConfig cfg;
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::string> unknown;
    std::string line;
    int lineno = 0;
    const auto& keys = known_keys();
    while ( std::getline( f, line ) ) {
      ++lineno;
      const auto hash = line.find( '#' );
      if ( hash != std::string::npos )
        line.erase( hash );
      line = trim( line );
      if ( line.empty() )
        continue;
      const auto eq = line.find( '=' );
      if ( eq == std::string::npos )
        throw DomainError( "config line " + std::to_string( lineno )
                           + ": expected key = value" );
      const std::string key = trim( line.substr( 0, eq ) );
      const std::string value = trim( line.substr( eq + 1 ) );
      if ( key.empty() || value.empty() )
        throw DomainError( "config line " + std::to_string( lineno )
                           + ": empty key or value" );
      if ( std::find( keys.begin(), keys.end(), key ) == keys.end() ) {
        unknown.push_back( key );
        continue;
      }
      entries.emplace_back( key, value );
    }
    if ( !unknown.empty() ) {
      std::string msg = "unknown configuration keys:";
      for ( const auto& k : unknown )
        msg += " " + k;
      throw DomainError( msg );
    }
    for ( const auto& [key, value] : entries )
      cfg.set( key, value );
    cfg.validate();
    return cfg;
  }

  const std::vector<std::string>& scenario_names()
  {
    static const std::vector<std::string> names = {
      "fig9a", "fig9b", "fig10a", "fig10b", "conservation", "linear-cbs"
    };
    return names;
  }

  ScenarioResult run_scenario( const RunConfig& cfg0 )
  {
    RunConfig cfg = cfg0;
    cfg.validate();
    if ( cfg.scenario.empty() )
      throw DomainError("no scenario selected (set scenario = ... or pass"
                        " --scenario)");
    Eigen::setNbThreads( cfg.threads );
    std::filesystem::create_directories( cfg.output_dir );

    Emitter em;
    em.dir = cfg.output_dir;
    Stages st;
    st.verbose = cfg.verbose;
    json summary = json::object();
    summary["convergence"] = json::object();
    CheckSet ck;

    try {
      if ( cfg.scenario == "fig9a" )
        scenario_fig9a( cfg, em, st, summary, ck );
      else if ( cfg.scenario == "fig9b" )
        scenario_fig9b( cfg, em, st, summary, ck );
      else if ( cfg.scenario == "fig10a" )
        scenario_fig10a( cfg, em, st, summary, ck );
      else if ( cfg.scenario == "fig10b" )
        scenario_fig10b( cfg, em, st, summary, ck );
      else if ( cfg.scenario == "conservation" )
        scenario_conservation( cfg, em, st, summary, ck );
      else if ( cfg.scenario == "linear-cbs" )
        scenario_linear_cbs( cfg, em, st, summary, ck );
      else
        throw DomainError( "unknown scenario '" + cfg.scenario + "'" );
    } catch ( const std::exception& e ) {
      //no manifest on an aborted run; mark whatever was already written
      std::ofstream marker( em.dir / "run_failed.txt",
                            std::ios::binary | std::ios::trunc );
      marker << "scenario " << cfg.scenario << " did not complete: "
             << e.what() << "\n";
      throw;
    }

    em.json_file( "summary.json", summary );

    json manifest;
    manifest["artifact"] = "slab-transport";
    manifest["artifact_version"] = kArtifactVersion;
    manifest["scenario"] = cfg.scenario;
    manifest["completed"] = true;
    manifest["config"] = config_echo( cfg );
    json stages = json::object();
    for ( const auto& [name, secs] : st.seconds )
      stages[name] = secs;
    manifest["stage_seconds"] = stages;
    manifest["convergence"] = summary["convergence"];
    manifest["checks"] = json{ { "passed", ck.passed },
                               { "failures", ck.failures },
                               { "report", ck.report } };
    json files = json::object();
    for ( const auto& fi : em.files )
      files[fi.name] = json{ { "bytes", fi.bytes },
                             { "fnv1a64", hex64( fi.checksum ) } };
    manifest["files"] = files;
    manifest["curve_files"] = em.curve_count;
    {
      const std::string bytes = manifest.dump( 2 ) + "\n";
      std::ofstream f( em.dir / "manifest.json",
                       std::ios::binary | std::ios::trunc );
      if ( !f || !( f << bytes ) )
        throw Error("cannot write manifest.json");
    }

    ScenarioResult r;
    r.scenario = cfg.scenario;
    for ( const auto& fi : em.files )
      r.files.push_back( fi.name );
    r.files.push_back( "manifest.json" );
    r.checks_passed = ck.passed;
    r.failures = ck.failures;
    return r;
  }

}
