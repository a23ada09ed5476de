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
#include "slabt/collision_kernels.hpp"
#include <map>
#include <mutex>
#include <vector>

namespace slabt {

  namespace {

    struct GLRule {
      std::vector<double> x, w;  //nodes and weights on [-1, 1]
    };

    GLRule make_gl_rule( int n )
    {
      GLRule r;
      r.x.resize(n);
      r.w.resize(n);
      for ( int i = 0; i < (n + 1) / 2; ++i ) {
        double t = std::cos( M_PI * ( i + 0.75 ) / ( n + 0.5 ) );
        double p1 = t, dp = 1.0;
        for ( int it = 0; it < 100; ++it ) {
          double p0 = 1.0;
          p1 = t;
          for ( int k = 2; k <= n; ++k ) {
            const double p2 = ( (2*k - 1) * t * p1 - (k - 1) * p0 ) / k;
            p0 = p1;
            p1 = p2;
          }
          dp = n * ( t * p1 - p0 ) / ( t * t - 1.0 );
          const double dt = p1 / dp;
          t -= dt;
          if ( std::abs(dt) < 1e-15 )
            break;
        }
        r.x[i] = -t;
        r.x[n - 1 - i] = t;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ( ( 1.0 - t * t ) * dp * dp );
      }
      return r;
    }

    const GLRule& gl_rule( int n )
    {
      static std::mutex mtx;
      static std::map<int, GLRule> cache;
      std::lock_guard<std::mutex> lock(mtx);
      auto it = cache.find(n);
      if ( it == cache.end() )
        it = cache.emplace( n, make_gl_rule(n) ).first;
      return it->second;
    }

    template<class TFunc>
    double gl_integrate( const TFunc& f, double a, double b, int n )
    {
      const GLRule& r = gl_rule(n);
      const double mid = 0.5 * ( a + b ), half = 0.5 * ( b - a );
      double s = 0.0;
      for ( int i = 0; i < n; ++i )
        s += r.w[i] * f( mid + half * r.x[i] );
      return s * half;
    }

    //one panel, optionally mapped through E = lo + t^2 (toward_lower) or
    //E = hi - t^2 (toward_upper) to absorb a square-root edge
    enum class Edge { none, lower, upper };

    template<class TFunc>
    double panel( const TFunc& f, double a, double b, Edge e, int n,
                  double max_len = 1e300 )
    {
      if ( !( b > a ) )
        return 0.0;
      if ( e == Edge::lower ) {
        auto g = [&]( double t ) { return 2.0 * t * f( a + t * t ); };
        return gl_integrate( g, 0.0, std::sqrt( b - a ), n );
      }
      if ( e == Edge::upper ) {
        auto g = [&]( double t ) { return 2.0 * t * f( b - t * t ); };
        return gl_integrate( g, 0.0, std::sqrt( b - a ), n );
      }
      const int parts = std::max( 1, int( std::ceil( ( b - a ) / max_len ) ) );
      const double h = ( b - a ) / parts;
      double s = 0.0;
      for ( int i = 0; i < parts; ++i )
        s += gl_integrate( f, a + i * h, a + (i + 1) * h, n );
      return s;
    }

    //moments of f over its kinematic support [0, E1+E2]: the min() kernel
    //switches branch at min(E1,E2) and at E1+E2-min(E1,E2), and carries a
    //square-root edge at both support ends
    template<class TFunc>
    double f_moment( double E1, double E2, const InteractionParams& p,
                     const TFunc& weight, int n )
    {
      const double s = E1 + E2, m = std::min( E1, E2 );
      auto integ = [&]( double E )
        { return weight(E) * ladder_f( E1, E2, E, p ); };
      return panel( integ, 0.0, m, Edge::lower, n )
        + panel( integ, m, s - m, Edge::none, n )
        + panel( integ, s - m, s, Edge::upper, n );
    }

    template<class TFunc>
    double converged( const TFunc& eval, const Quadrature& q,
                      const char* what )
    {
      double prev = eval( q.initial_points );
      for ( int n = 2 * q.initial_points; n <= q.max_points; n *= 2 ) {
        const double cur = eval( n );
        if ( std::abs( cur - prev ) <= q.abs_tol )
          return cur;
        prev = cur;
      }
      throw ConvergenceError( std::string("quadrature did not reach abs_tol: ")
                              + what );
    }

  }

  double check_particle_conservation( double E1, double E2,
                                      const InteractionParams& p,
                                      const Quadrature& q )
  {
    if ( !(E1 > 0.0) || !(E2 > 0.0) )
      throw DomainError("check_particle_conservation requires positive"
                        " energies");
    const double integral = converged( [&]( int n ) {
      return f_moment( E1, E2, p,
                       []( double E ) { return std::sqrt(E); }, n );
    }, q, "particle conservation" );
    return std::sqrt(E2) * ladder_g( E1, E2, p ) + integral;
  }

  double check_energy_conservation( double E1, double E2,
                                    const InteractionParams& p,
                                    const Quadrature& q )
  {
    if ( !(E1 > 0.0) || !(E2 > 0.0) )
      throw DomainError("check_energy_conservation requires positive"
                        " energies");
    const double integral = converged( [&]( int n ) {
      return f_moment( E1, E2, p,
                       []( double E ) { return 2.0 * E * std::sqrt(E); }, n );
    }, q, "energy conservation" );
    return ( E1 + E2 ) * std::sqrt(E2) * ladder_g( E1, E2, p ) + integral;
  }

  double check_reversibility( double E1, double E2, double E3,
                              const InteractionParams& p )
  {
    const double E4 = E1 + E2 - E3;
    if ( E4 <= 0.0 )
      return 0.0;
    return ladder_f( E1, E2, E3, p ) / std::sqrt(E4)
      - ladder_f( E3, E4, E1, p ) / std::sqrt(E2);
  }

  double mb_collision_residual( double E_obs, double E_max,
                                const InteractionParams& p,
                                const Quadrature& q )
  {
    if ( !(E_obs > 0.0) || !(E_max > E_obs) )
      throw DomainError("mb_collision_residual requires 0 < E_obs < E_max");
    const double Eo = E_obs;
    auto N = []( double E ) { return std::sqrt(E) * std::exp( -2.0 * E ); };

    //thermal weight drops like exp(-2E); cap panel length so the decaying
    //tail is still resolved
    const double maxlen = 2.5;

    auto sorted_cuts = [&]( std::vector<double> c, double lo, double hi ) {
      std::vector<double> out{ lo };
      std::sort( c.begin(), c.end() );
      for ( double v : c )
        if ( v > lo + 1e-14 && v < hi - 1e-14 )
          out.push_back(v);
      out.push_back(hi);
      return out;
    };

    auto gain_eval = [&]( int n ) {
      auto inner = [&]( double Ep ) {
        const double lo = std::max( 0.0, Eo - Ep );
        auto ig = [&]( double Epp )
          { return N(Epp) * ladder_f( Ep, Epp, Eo, p ); };
        const auto cuts = sorted_cuts( { Ep, Eo, 2.0 * Eo - Ep },
                                       lo, E_max );
        double s = panel( ig, cuts[0], cuts[1], Edge::lower, n );
        for ( std::size_t i = 1; i + 1 < cuts.size(); ++i )
          s += panel( ig, cuts[i], cuts[i + 1], Edge::none, n, maxlen );
        return s;
      };
      auto og = [&]( double Ep ) { return N(Ep) * inner(Ep); };
      const auto cuts = sorted_cuts( { std::max( 0.0, 2.0 * Eo - E_max ), Eo,
                                       std::min( 2.0 * Eo, E_max ) },
                                     0.0, E_max );
      double s = panel( og, cuts[0], cuts[1], Edge::lower, n );
      for ( std::size_t i = 1; i + 1 < cuts.size(); ++i )
        s += panel( og, cuts[i], cuts[i + 1], Edge::none, n, maxlen );
      return s;
    };

    auto loss_eval = [&]( int n ) {
      auto ig = [&]( double Ep ) { return N(Ep) * ladder_g( Ep, Eo, p ); };
      return panel( ig, 0.0, Eo, Edge::lower, n )
        + panel( ig, Eo, E_max, Edge::none, n, maxlen );
    };

    const double gain = converged( gain_eval, q, "thermal gain" );
    const double loss = N(Eo) * converged( loss_eval, q, "thermal loss" );
    const double scale = std::max( std::abs(gain), std::abs(loss) );
    if ( scale == 0.0 )
      return 0.0;
    return std::abs( gain + loss ) / scale;
  }

}
