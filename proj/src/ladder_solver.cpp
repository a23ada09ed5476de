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
#include "slabt/ladder_solver.hpp"
#include <chrono>
#include <limits>

namespace slabt {

  Vec solve_linear( const Mat& K, const Vec& I0 )
  {
    const Index n = K.rows();
    return ( Mat::Identity( n, n ) - K ).partialPivLu().solve( I0 );
  }

  namespace {

    double seconds_since( std::chrono::steady_clock::time_point t0 )
    {
      return std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0 ).count();
    }

  }

  LadderSolution solve_ladder( const LadderConfig& cfg )
  {
    cfg.validate();
    const SpatialGrid zg( cfg.b, cfg.Nz );
    const EnergyGrid eg( cfg.E_max, cfg.NE );
    const Index Nz = zg.Nz, NE = eg.NE;

    LadderSolution sol{ zg, eg, cfg.params, {}, {}, {}, {}, 0, 0.0, false, {} };
    sol.K = build_ladder_matrix( zg );
    sol.I0 = build_source( zg );
    sol.J_linear = solve_linear( sol.K, sol.I0 );
    sol.field.elastic = sol.J_linear;
    sol.field.smooth = Mat::Zero( NE, Nz );
    if ( cfg.params.alpha == 0.0 ) {
      //no collisions: the elastic channel is exactly the linear solution
      sol.converged = true;
      return sol;
    }

    const LadderTables tables = build_ladder_tables( eg, cfg.params );
    const Index iE = eg.i_Ei;
    const Vec& w = eg.w;
    const double ref = sol.J_linear.maxCoeff();
    const double guard = -cfg.tol * ref;

    //tables rearranged for the per-iteration contractions
    Mat FWflat( NE, NE * NE );   //FWflat(k, a*NE+b) = fhat(a,b,k) w_a w_b
    Mat FiW( NE, NE );           //FiW(b, k) = fhat(iE,b,k) w_b
    Vec f_ii( NE );
    for ( Index a = 0; a < NE; ++a )
      for ( Index b = 0; b < NE; ++b ) {
        const double wab = w[a] * w[b];
        for ( Index k = 0; k < NE; ++k )
          FWflat( k, a * NE + b ) = tables.f( a, b, k ) * wab;
      }
    for ( Index b = 0; b < NE; ++b )
      for ( Index k = 0; k < NE; ++k )
        FiW( b, k ) = tables.f( iE, b, k ) * w[b];
    for ( Index k = 0; k < NE; ++k )
      f_ii[k] = tables.f( iE, iE, k );
    const Vec g_col_i = tables.ghat.col( iE );              //loss onto E_i
    const Mat gW = tables.ghat.cwiseProduct( w.replicate( 1, NE ) );

    Vec A = sol.J_linear;
    Mat B = Mat::Zero( NE, Nz );
    Mat Q( NE * NE, Nz );
    Vec dA( Nz ), LA( Nz );
    Mat dB( NE, Nz );

    const auto t0 = std::chrono::steady_clock::now();
    auto& hist = sol.residual_history;
    hist.reserve( 4096 );

    //one undamped sweep of the split transport equation; dAx/dBx receive
    //the update increments
    auto apply = [&]( const Vec& Ax, const Mat& Bx, Vec& dAx, Mat& dBx ) {
      //elastic-channel collision factor and per-energy loss factors
      LA = tables.ghat( iE, iE ) * Ax
        + Bx.transpose() * w.cwiseProduct( g_col_i );
      //LB(k, z) = ghat(iE, k) A(z) + sum_a ghat(a,k) w_a B(a,z)
      Mat LB = tables.ghat.row( iE ).transpose() * Ax.transpose();
      LB.noalias() += gW.transpose() * Bx;
      //pair-gain contraction over both smooth arguments
      for ( Index a = 0; a < NE; ++a )
        Q.middleRows( a * NE, NE )
          = ( Bx.array().rowwise() * Bx.row(a).array() ).matrix();
      Mat FB( NE, Nz );
      FB.noalias() = FWflat * Q;
      //two delta-smooth cross gains plus the pure delta gain
      Mat G2( NE, Nz );
      G2.noalias() = FiW.transpose() * Bx;
      FB += 2.0 * ( G2.array().rowwise() * Ax.transpose().array() ).matrix();
      FB.noalias() += f_ii * Ax.cwiseProduct( Ax ).transpose();
      //propagation and the smooth loss term
      FB.noalias() += Bx * sol.K;
      FB += LB.cwiseProduct( Bx );
      dAx = sol.I0 + sol.K * Ax + Ax.cwiseProduct( LA ) - Ax;
      dBx = FB - Bx;
    };

    double res = std::numeric_limits<double>::infinity();
    Vec prevA[2];
    Mat prevB[2];
    int nprev = 0;
    constexpr int acc_every = 25;

    auto record = [&]( double r ) {
      //monotone-decrease contract after the warm-up iterations
      if ( cfg.damping <= 0.5 && hist.size() > 5
           && r > hist.back() * ( 1.0 + 1e-12 ) )
        throw InstabilityError(
          "ladder iteration residual increased after iteration 5"
          " (reduce damping)" );
      hist.push_back( r );
      if ( cfg.log && cfg.log_every > 0
           && ( hist.size() - 1 ) % std::size_t(cfg.log_every) == 0 )
        cfg.log( int( hist.size() - 1 ), r, seconds_since( t0 ) );
    };

    for ( int it = 0; it < cfg.max_iters; ++it ) {
      apply( A, B, dA, dB );
      res = cfg.damping * ( dA.cwiseAbs().maxCoeff()
                            + dB.cwiseAbs().maxCoeff() ) / ref;
      record( res );
      A += cfg.damping * dA;
      B += cfg.damping * dB;
      if ( A.minCoeff() < guard || B.minCoeff() < guard )
        throw InstabilityError("ladder iterate went negative beyond"
                               " tolerance (reduce damping)");
      if ( res < cfg.tol )
        break;

      //dominant-mode extrapolation every few sweeps, accepted only when it
      //reduces the residual and keeps the iterate nonnegative
      if ( it % acc_every == acc_every - 1 ) {
        if ( nprev == 2 ) {
          const Vec e1A = A - prevA[1];
          const Mat e1B = B - prevB[1];
          const Vec e0A = prevA[1] - prevA[0];
          const Mat e0B = prevB[1] - prevB[0];
          const double den = e0A.squaredNorm() + e0B.squaredNorm();
          const double rho = den > 0.0
            ? ( e1A.dot( e0A ) + e1B.cwiseProduct( e0B ).sum() ) / den
            : 0.0;
          if ( rho > 0.0 && rho < 0.9999 ) {
            const double fac = rho / ( 1.0 - rho );
            const Vec At = A + fac * e1A;
            const Mat Bt = B + fac * e1B;
            if ( At.minCoeff() >= guard && Bt.minCoeff() >= guard ) {
              apply( At, Bt, dA, dB );
              const double rest = cfg.damping * ( dA.cwiseAbs().maxCoeff()
                                                  + dB.cwiseAbs().maxCoeff() )
                / ref;
              const Vec An = At + cfg.damping * dA;
              const Mat Bn = Bt + cfg.damping * dB;
              if ( rest < res && An.minCoeff() >= guard
                   && Bn.minCoeff() >= guard ) {
                A = An;
                B = Bn;
                res = rest;
                record( rest );
                if ( res < cfg.tol )
                  break;
              }
            }
          }
        }
        prevA[0] = std::move( prevA[1] );
        prevB[0] = std::move( prevB[1] );
        prevA[1] = A;
        prevB[1] = B;
        nprev = std::min( nprev + 1, 2 );
      }
    }

    sol.iterations = int( hist.size() );
    sol.residual = res;
    sol.converged = res < cfg.tol;
    if ( !sol.converged )
      throw ConvergenceError(
        "ladder iteration did not converge: residual "
        + std::to_string( res ) + " after "
        + std::to_string( sol.iterations ) + " iterations" );
    sol.field.elastic = A;
    sol.field.smooth = B;
    if ( cfg.log )
      cfg.log( sol.iterations, res, seconds_since( t0 ) );
    return sol;
  }

  FluxProfiles flux_profiles( const LadderSolution& sol )
  {
    const EnergyGrid& eg = sol.eg;
    const Vec sqE = eg.E.array().sqrt().matrix();
    FluxProfiles f;
    f.J_el = std::sqrt( kEi ) * sol.field.elastic;
    f.J_inel = sol.field.smooth.transpose() * eg.w.cwiseProduct( sqE );
    f.J = f.J_el + f.J_inel;
    f.K_energy = std::pow( kEi, 1.5 ) * sol.field.elastic
      + sol.field.smooth.transpose()
      * eg.w.cwiseProduct( sqE ).cwiseProduct( eg.E );
    return f;
  }

  namespace {

    Index nearest_depth_node( const SpatialGrid& zg, double z )
    {
      if ( z < 0.0 || z > zg.b )
        throw DomainError("depth outside the slab");
      const Index i = Index( std::lround( z / zg.h - 0.5 ) );
      return std::min( std::max<Index>( i, 0 ), zg.Nz - 1 );
    }

  }

  Vec spectral_distribution( const LadderSolution& sol, double z )
  {
    const Index col = nearest_depth_node( sol.zg, z );
    const EnergyGrid& eg = sol.eg;
    Vec s = sol.field.smooth.col( col )
      .cwiseProduct( eg.E.array().sqrt().matrix() );
    const double tot = eg.w.dot( s );
    if ( !( tot > 0.0 ) )
      throw DomainError("spectral_distribution: inelastic spectrum vanishes"
                        " at this depth");
    return s / tot;
  }

  double thermal_l1_distance( const LadderSolution& sol, double z )
  {
    const EnergyGrid& eg = sol.eg;
    const Vec s = spectral_distribution( sol, z );
    Vec mb = ( 4.0 * eg.E.array() / ( kEi * kEi )
               * ( -2.0 * eg.E.array() / kEi ).exp() ).matrix();
    mb /= eg.w.dot( mb );
    return eg.w.dot( ( s - mb ).cwiseAbs() );
  }

  LadderBistatic ladder_bistatic( const LadderSolution& sol, double theta )
  {
    const Vec wp = ladder_projection( sol.zg, theta );
    const EnergyGrid& eg = sol.eg;
    LadderBistatic out;
    out.gamma_E = ( eg.E.array() / kEi ).sqrt().matrix()
      .cwiseProduct( sol.field.smooth * wp );
    out.elastic = wp.dot( sol.field.elastic );
    out.inelastic = eg.w.dot( out.gamma_E );
    out.total = out.elastic + out.inelastic;
    out.single = wp.dot( sol.I0 );
    return out;
  }

  double flux_closure( const LadderSolution& sol )
  {
    const FluxProfiles f = flux_profiles( sol );
    const SpatialGrid& zg = sol.zg;
    double refl = 0.0, trans = 0.0;
    for ( Index i = 0; i < zg.Nz; ++i ) {
      refl += zg.h * f.J[i] * 0.5 * e2_real( zg.z[i] );
      trans += zg.h * f.J[i] * 0.5 * e2_real( zg.b - zg.z[i] );
    }
    return refl + trans + std::exp( -zg.b );
  }

}
