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
#include "slabt/crossed_solver.hpp"
#include <chrono>

namespace slabt {

  namespace {

    //linear interpolation of spectrum rows onto arbitrary energies; below
    //the first node the spectrum falls linearly to zero at E = 0, at and
    //beyond the last node it vanishes
    Mat interp_rows( const Vec& El, const Mat& B, const Vec& Evals )
    {
      Mat out = Mat::Zero( Evals.size(), B.cols() );
      const Index n = El.size();
      for ( Index r = 0; r < Evals.size(); ++r ) {
        const double Ev = Evals[r];
        if ( Ev >= El[n - 1] )
          continue;
        if ( Ev <= El[0] ) {
          out.row(r) = B.row(0) * ( Ev / El[0] );
        } else {
          const Index j = Index( std::upper_bound( El.data(), El.data() + n,
                                                   Ev ) - El.data() ) - 1;
          const double t = ( Ev - El[j] ) / ( El[j + 1] - El[j] );
          out.row(r) = ( 1.0 - t ) * B.row(j) + t * B.row(j + 1);
        }
      }
      return out;
    }

    double seconds_since( std::chrono::steady_clock::time_point t0 )
    {
      return std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0 ).count();
    }

  }

  CrossedSolution solve_crossed( const LadderSolution& ladder,
                                 const CrossedConfig& cfg )
  {
    if ( !ladder.converged )
      throw DomainError("solve_crossed requires a converged ladder solution");
    if ( !( cfg.tol > 0.0 ) || !( cfg.damping > 0.0 && cfg.damping <= 1.0 ) )
      throw DomainError("CrossedConfig requires tol > 0 and damping in (0,1]");

    const SpatialGrid& zg = ladder.zg;
    const CrossedGrid cg( cfg.E_d, cfg.target_h );
    const double E_d = cg.E_d;
    const Index NEc = cg.NE, Nz = zg.Nz;
    const Index ki = cg.ki, kd = cg.kd;
    const bool elastic = ( ki == kd );
    const InteractionParams& p = cfg.params;
    const bool have_f = p.alpha != 0.0;

    const Vec& El = ladder.eg.E;
    const Vec& wl = ladder.eg.w;
    const Index iEl = ladder.eg.i_Ei;
    const VecC Az = ladder.field.elastic.cast<Cplx>();
    const MatC BC = ladder.field.smooth.cast<Cplx>();
    const VecC wcC = cg.w.cast<Cplx>();

    //ladder spectrum at the crossed energies, their tilde partners, and at
    //the detected energy itself
    Vec Etld( NEc );
    for ( Index k = 0; k < NEc; ++k )
      Etld[k] = cg.E_max - cg.E[k];
    const MatC Btl = interp_rows( El, ladder.field.smooth, Etld )
      .cast<Cplx>();
    const MatC Bc = interp_rows( El, ladder.field.smooth, cg.E )
      .cast<Cplx>();
    const VecC B_Ed = interp_rows( El, ladder.field.smooth,
                                   Vec::Constant( 1, E_d ) )
      .row(0).transpose().cast<Cplx>();

    //collision tables: gC couples the ladder spectrum into the loss factor,
    //hm and hstar couple the crossed channels among themselves
    MatC gC( El.size(), NEc );
    for ( Index a = 0; a < El.size(); ++a )
      for ( Index k = 0; k < NEc; ++k )
        gC(a, k) = crossed_gC_directional( El[a], cg.E[k], E_d, p );
    MatC hm( NEc, NEc );
    for ( Index j = 0; j < NEc; ++j )
      for ( Index k = 0; k < NEc; ++k )
        hm(j, k) = crossed_h( cg.E[j], cg.E[k], E_d, p );
    MatC hstar( NEc, NEc );
    for ( Index j = 0; j < NEc; ++j )
      for ( Index k = 0; k < NEc; ++k )
        hstar(j, k) = std::conj( hm( cg.tilde[j], cg.tilde[k] ) );

    //pair-gain tables contracted with the ladder spectrum:
    //  fCi(j, k)        f^C(E_i, E_j, E_k)
    //  fC_ii(k)         f^C(E_i, E_i, E_k)
    //  fB_i(k, z)       sum_a f^C(E_a, E_i, E_k) w_a B_a(z)
    //  Pflat(j+N*k, z)  w_j sum_a f^C(E_a, E_j, E_k) w_a B_a(z)
    MatC fCi, fB_i, Pflat;
    VecC fC_ii;
    if ( have_f ) {
      const Index NEl = El.size();
      MatC Fflat( NEc * NEc, NEl );  //column a holds f^C(E_a, :, :)
      MatC Fki( NEc, NEl );
      for ( Index a = 0; a < NEl; ++a ) {
        for ( Index k = 0; k < NEc; ++k )
          for ( Index j = 0; j < NEc; ++j )
            Fflat( j + NEc * k, a ) = crossed_fC( El[a], cg.E[j], cg.E[k],
                                                  E_d, p );
        for ( Index k = 0; k < NEc; ++k )
          Fki( k, a ) = Fflat( ki + NEc * k, a ) * wl[a];
      }
      Pflat.noalias() = Fflat * ( wl.asDiagonal() * ladder.field.smooth )
        .cast<Cplx>();
      for ( Index k = 0; k < NEc; ++k )
        Pflat.middleRows( NEc * k, NEc ).array().colwise() *= wcC.array();
      fCi.resize( NEc, NEc );
      for ( Index k = 0; k < NEc; ++k )
        for ( Index j = 0; j < NEc; ++j )
          fCi(j, k) = Fflat( j + NEc * k, iEl );
      fC_ii = fCi.row( ki ).transpose();
      fB_i.noalias() = Fki * BC;
    }

    //per-channel loss factor from the converged ladder field
    MatC Lc( NEc, Nz );
    Lc.noalias() = ( wl.cast<Cplx>().asDiagonal() * gC ).transpose() * BC;
    Lc.noalias() += gC.row( iEl ).transpose() * Az.transpose();

    //channel-implicit splitting: each sweep solves the propagation and the
    //local loss exactly, so the near-elastic channels, whose propagation
    //kernel alone has spectral radius close to 1, cannot amplify across a
    //sweep; only the weak inter-channel couplings iterate
    const MatC Id = MatC::Identity( Nz, Nz );
    std::vector<Eigen::PartialPivLU<MatC>> lus;
    lus.reserve( std::size_t( NEc ) );
    for ( Index k = 0; k < NEc; ++k ) {
      MatC M = Id - build_crossed_matrix( zg, cg.E[k], E_d, p.k_ell );
      M.diagonal() -= Lc.row(k).transpose();
      lus.emplace_back( std::move( M ) );
    }
    //the delta channels' self-couplings join the implicit diagonal
    MatC Mchi = Id - build_crossed_matrix( zg, cg.E[ki], E_d, p.k_ell );
    Mchi.diagonal() -= Lc.row(ki).transpose();
    Mchi.diagonal() -= hstar(ki, ki) * Az;
    const Eigen::PartialPivLU<MatC> lu_chi( std::move( Mchi ) );
    MatC Mdel = Id - build_crossed_matrix( zg, cg.E[kd], E_d, p.k_ell );
    Mdel.diagonal() -= Lc.row(kd).transpose();
    Mdel.diagonal() -= hm(kd, kd) * Az;
    const Eigen::PartialPivLU<MatC> lu_del( std::move( Mdel ) );

    const VecC I0C = build_crossed_source( zg, cfg.theta, E_d, p.k_ell );
    const VecC wproj = crossed_projection( zg, cfg.theta, E_d, p.k_ell );
    const double ref = I0C.cwiseAbs().maxCoeff();

    //precontracted coupling matrices
    const VecC hski_w = hstar.row(ki).transpose().cwiseProduct( wcC );
    const MatC HsW = hstar * wcC.asDiagonal();            //(k,j) w_j
    const MatC HmTW = hm.transpose() * wcC.asDiagonal();
    MatC FciTW;
    if ( have_f )
      FciTW = fCi.transpose() * wcC.asDiagonal();

    VecC chi = VecC::Zero( Nz );
    MatC S1 = MatC::Zero( NEc, Nz );
    MatC S2 = MatC::Zero( NEc, Nz );
    MatC D = MatC::Zero( elastic ? NEc : 0, Nz );

    auto add_pair_gain = [&]( const MatC& X, MatC& rhs ) {
      for ( Index z = 0; z < Nz; ++z )
        rhs.col(z).noalias() +=
          Eigen::Map<const MatC>( Pflat.col(z).data(), NEc, NEc )
          .transpose() * X.col(z);
    };

    const auto t0 = std::chrono::steady_clock::now();
    double res = std::numeric_limits<double>::infinity();
    int it = 0;
    bool done = false;
    while ( it < cfg.max_iters && !done ) {
      //delta channel of C1
      const VecC chi_n = lu_chi.solve(
        I0C + Az.cwiseProduct( S1.transpose() * hski_w ) );

      //smooth part of C1, fed by the ladder spectrum at the running energy
      MatC rhs1 = hstar.col(ki) * chi.transpose();
      rhs1.noalias() += HsW * S1;
      rhs1 = Bc.cwiseProduct( rhs1 );
      if ( have_f ) {
        rhs1.noalias() += fC_ii * Az.cwiseProduct( chi ).transpose();
        rhs1.array() += ( FciTW * S1 ).array().rowwise()
          * Az.transpose().array();
        rhs1.array() += fB_i.array().rowwise() * chi.transpose().array();
        add_pair_gain( S1, rhs1 );
      }
      MatC S1_n( NEc, Nz );
      for ( Index k = 0; k < NEc; ++k )
        S1_n.row(k) = lus[std::size_t(k)]
          .solve( rhs1.row(k).transpose() ).transpose();

      //smooth part of C2, fed by the tilde-side ladder spectrum
      const MatC S12 = S1 + S2;
      MatC rhs2 = hm.row(kd).transpose()
        * Az.cwiseProduct( S12.row(kd).transpose() ).transpose();
      rhs2.noalias() += HmTW * Btl.cwiseProduct( S12 );
      rhs2.noalias() += hm.row(ki).transpose()
        * B_Ed.cwiseProduct( chi ).transpose();
      if ( have_f ) {
        rhs2.array() += ( FciTW * S2 ).array().rowwise()
          * Az.transpose().array();
        add_pair_gain( S2, rhs2 );
      }
      //the detected channel's self-coupling already sits on the implicit
      //diagonal and must not be applied twice
      rhs2.row(kd) -= ( hm(kd, kd)
                        * Az.cwiseProduct( S2.row(kd).transpose() ) )
        .transpose();
      MatC S2_n( NEc, Nz );
      for ( Index k = 0; k < NEc; ++k )
        S2_n.row(k) = ( k == kd ? lu_del : lus[std::size_t(k)] )
          .solve( rhs2.row(k).transpose() ).transpose();

      //delta-detection channel of C2, present only at elastic detection
      MatC D_n;
      if ( elastic ) {
        MatC rhsD = hm.row(ki).transpose()
          * Az.cwiseProduct( chi + D.row(ki).transpose() ).transpose();
        rhsD.noalias() += HmTW * Btl.cwiseProduct( D );
        if ( have_f ) {
          rhsD.array() += ( FciTW * D ).array().rowwise()
            * Az.transpose().array();
          add_pair_gain( D, rhsD );
        }
        rhsD.row(ki) -= ( hm(ki, ki)
                          * Az.cwiseProduct( D.row(ki).transpose() ) )
          .transpose();
        D_n.resize( NEc, Nz );
        for ( Index k = 0; k < NEc; ++k )
          D_n.row(k) = ( k == ki ? lu_del : lus[std::size_t(k)] )
            .solve( rhsD.row(k).transpose() ).transpose();
      }

      double dmax = ( chi_n - chi ).cwiseAbs().maxCoeff()
        + ( S1_n - S1 ).cwiseAbs().maxCoeff()
        + ( S2_n - S2 ).cwiseAbs().maxCoeff();
      chi += cfg.damping * ( chi_n - chi );
      S1 += cfg.damping * ( S1_n - S1 );
      S2 += cfg.damping * ( S2_n - S2 );
      if ( elastic ) {
        dmax += ( D_n - D ).cwiseAbs().maxCoeff();
        D += cfg.damping * ( D_n - D );
      }
      res = cfg.damping * dmax / ref;
      ++it;
      if ( cfg.log && cfg.log_every > 0 && it % cfg.log_every == 0 )
        cfg.log( it, res, seconds_since( t0 ) );
      if ( res < cfg.tol )
        done = true;
    }
    if ( !done )
      throw ConvergenceError( "crossed iteration stalled at residual "
                              + std::to_string( res ) + " after "
                              + std::to_string( it ) + " sweeps" );

    CrossedSolution out{ cg, E_d, cfg.theta, elastic, p,
                         std::move( chi ), std::move( S1 ), std::move( S2 ),
                         std::move( D ), I0C, wproj,
                         Cplx(0.0), Cplx(0.0), it, res, true };
    if ( elastic )
      out.gamma_el = wproj.cwiseProduct( out.chi + out.D.row(ki).transpose()
                                         - I0C ).sum();
    out.gamma_inel = std::sqrt( E_d / kEi )
      * wproj.cwiseProduct( ( out.S1.row(kd) + out.S2.row(kd) ).transpose() )
      .sum();
    return out;
  }

  namespace {

    double checked_real( Cplx v, const char* what )
    {
      const double rel = std::abs( v.imag() )
        / std::max( std::abs( v.real() ), 1e-14 );
      if ( rel > 1e-8 )
        throw ConsistencyError( std::string( what )
                                + ": imaginary part above 1e-8 relative ("
                                + std::to_string( rel ) + ")" );
      return v.real();
    }

  }

  double crossed_bistatic( const CrossedSolution& sol )
  {
    return checked_real( sol.gamma_inel, "crossed spectral density" );
  }

  double crossed_bistatic_elastic( const CrossedSolution& sol )
  {
    if ( !sol.elastic )
      throw DomainError("crossed_bistatic_elastic requires detection at the"
                        " elastic energy");
    return checked_real( sol.gamma_el, "crossed elastic signal" );
  }

  Enhancement enhancement_factor( double gamma_C_inel, double gamma_L_inel )
  {
    Enhancement e;
    if ( !( gamma_L_inel > 0.0 ) || !std::isfinite( gamma_L_inel ) )
      return e;
    e.value = ( gamma_C_inel + gamma_L_inel ) / gamma_L_inel;
    e.defined = true;
    return e;
  }

  double ladder_inelastic_density( const LadderSolution& ladder, double E_d )
  {
    if ( !( E_d > 0.0 ) )
      throw DomainError("ladder_inelastic_density requires E_d > 0");
    const Vec wp = ladder_projection( ladder.zg );
    const Mat Bd = interp_rows( ladder.eg.E, ladder.field.smooth,
                                Vec::Constant( 1, E_d ) );
    return std::sqrt( E_d / kEi ) * wp.dot( Bd.row(0).transpose() );
  }

  std::pair<Vec, Vec> ed_quad_grid( double lo, double hi, double dense,
                                    double coarse_fac )
  {
    if ( !( lo > 0.0 ) || !( hi > lo ) || !( dense > 0.0 )
         || !( coarse_fac >= 1.0 ) )
      throw DomainError("ed_quad_grid: invalid bounds or spacing");
    auto snap = [&]( double v ) { return std::round( v / dense ) * dense; };
    std::vector<double> pts{ snap( lo ) };
    double x = pts[0];
    while ( x < hi - 1e-12 ) {
      const double d = std::abs( x - kEi ) < 0.35 ? dense
        : dense * coarse_fac;
      x = std::min( snap( hi ), snap( x + d ) );
      pts.push_back( x );
    }
    const Vec xs = Eigen::Map<Vec>( pts.data(), Index( pts.size() ) );
    Vec ws = Vec::Zero( xs.size() );
    for ( Index i = 0; i + 1 < xs.size(); ++i ) {
      ws[i] += 0.5 * ( xs[i + 1] - xs[i] );
      ws[i + 1] += 0.5 * ( xs[i + 1] - xs[i] );
    }
    return { xs, ws };
  }

  CrossedSpectrum crossed_spectrum( const LadderSolution& ladder,
                                    const Vec& ed_nodes,
                                    const Vec& ed_weights,
                                    const CrossedConfig& base )
  {
    if ( ed_nodes.size() != ed_weights.size() || ed_nodes.size() == 0 )
      throw DomainError("crossed_spectrum: node/weight size mismatch");
    CrossedSpectrum sp;
    sp.E_d = ed_nodes;
    sp.weights = ed_weights;
    sp.gamma_C_inel.resize( ed_nodes.size() );
    sp.gamma_L_inel.resize( ed_nodes.size() );
    for ( Index i = 0; i < ed_nodes.size(); ++i ) {
      CrossedConfig cfg = base;
      cfg.E_d = ed_nodes[i];
      const CrossedSolution c = solve_crossed( ladder, cfg );
      sp.gamma_C_inel[i] = c.gamma_inel.real();
      sp.worst_imag_rel = std::max(
        sp.worst_imag_rel, std::abs( c.gamma_inel.imag() )
        / std::max( std::abs( c.gamma_inel.real() ), 1e-14 ) );
      sp.gamma_L_inel[i] = ladder_inelastic_density( ladder, c.E_d );
    }
    CrossedConfig el = base;
    el.E_d = kEi;
    sp.elastic = crossed_bistatic_elastic( solve_crossed( ladder, el ) );
    sp.total = sp.elastic + sp.weights.dot( sp.gamma_C_inel );
    return sp;
  }

  double gamma_C_total( const LadderSolution& ladder,
                        const std::pair<Vec, Vec>& ed_quad,
                        const CrossedConfig& base )
  {
    CrossedConfig el = base;
    el.E_d = kEi;
    const CrossedSolution cel = solve_crossed( ladder, el );
    double tot = crossed_bistatic_elastic( cel );
    if ( base.params.alpha != 0.0 ) {
      const Vec& xs = ed_quad.first;
      const Vec& ws = ed_quad.second;
      for ( Index i = 0; i < xs.size(); ++i ) {
        if ( std::abs( xs[i] - kEi ) < 1e-12 ) {
          tot += ws[i] * crossed_bistatic( cel );
          continue;
        }
        CrossedConfig cfg = base;
        cfg.E_d = xs[i];
        tot += ws[i] * crossed_bistatic( solve_crossed( ladder, cfg ) );
      }
    }
    return tot;
  }

  GpSweepResult gp_sweep( const LadderSolution& linear_ladder,
                          const Vec& betas, double k_ell,
                          const CrossedConfig& base )
  {
    if ( linear_ladder.params.alpha != 0.0 )
      throw DomainError("gp_sweep requires a linear (alpha = 0) ladder"
                        " solution");
    GpSweepResult r;
    r.beta = betas;
    r.gamma_C.resize( betas.size() );
    for ( Index i = 0; i < betas.size(); ++i ) {
      CrossedConfig cfg = base;
      cfg.params = InteractionParams( 0.0, betas[i], k_ell );
      cfg.E_d = kEi;
      r.gamma_C[i] = crossed_bistatic_elastic(
        solve_crossed( linear_ladder, cfg ) );
    }
    auto sgn = []( double v ) { return ( v > 0.0 ) - ( v < 0.0 ); };
    for ( Index i = 0; i + 1 < betas.size(); ++i ) {
      const double a = r.gamma_C[i], b = r.gamma_C[i + 1];
      if ( sgn( a ) != sgn( b ) ) {
        r.beta_star = betas[i] + ( betas[i + 1] - betas[i] ) * a / ( a - b );
        break;
      }
    }
    return r;
  }

}
