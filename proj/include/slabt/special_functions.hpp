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
#ifndef slabt_special_functions_hpp
#define slabt_special_functions_hpp

#include "slabt/core.hpp"
#include <cmath>

//Exponential integrals E1 and E2 for real and complex arguments, plus the
//cell-integrated E1 used to assemble slab propagation matrices. Accuracy is
//1e-12 (relative) on the real axis and 1e-10 off it, a thousand times
//tighter than any solver tolerance downstream.

namespace slabt {

  inline constexpr double kEulerGamma = 0.57721566490153286060651209008240;

  //Decay rate of one propagation step, in units of 1/ell_dis. Ladder
  //propagation has mu = 1; crossed propagation mu = 1 - i k_ell (sqrt(E) -
  //sqrt(Etilde)) keeps Re(mu) = 1 but the constructor guards the general
  //contract.
  struct ComplexDecayRate {
    Cplx mu;
    explicit ComplexDecayRate( Cplx m ) : mu(m)
    {
      if ( !(mu.real() > 0.0) )
        throw DomainError("ComplexDecayRate requires Re(mu) > 0");
    }
  };

  namespace detail {

    //E1(w) for Re(w) > 0. Power series below |w| = 2, modified Lentz
    //continued fraction above; the switch point sits at the standard
    //accuracy crossover of the two expansions.
    template<class TScalar>
    TScalar e1_any( TScalar w )
    {
      using std::abs; using std::log; using std::exp;
      if ( abs(w) < 2.0 ) {
        TScalar s = -kEulerGamma - log(w);
        TScalar term = TScalar(1.0);
        for ( int k = 1; k < 256; ++k ) {
          term *= -w / double(k);
          const TScalar add = -term / double(k);
          s += add;
          if ( abs(add) < 1e-18 * std::max( 1.0, abs(s) ) )
            return s;
        }
        throw ConsistencyError("e1 series did not converge");
      }
      //e^w E1(w) = 1/(w+1 - 1^2/(w+3 - 2^2/(w+5 - ...))), evaluated with the
      //modified Lentz scheme.
      constexpr double tiny = 1e-300;
      TScalar b = w + 1.0;
      TScalar f = b;
      TScalar c = f;
      TScalar d = TScalar(0.0);
      for ( int k = 1; k < 1024; ++k ) {
        const double a = -double(k) * double(k);
        b += 2.0;
        d = b + a * d;
        if ( abs(d) < tiny ) d = TScalar(tiny);
        c = b + a / c;
        if ( abs(c) < tiny ) c = TScalar(tiny);
        d = TScalar(1.0) / d;
        const TScalar delta = c * d;
        f *= delta;
        if ( abs(delta - 1.0) < 1e-15 )
          return exp(-w) / f;
      }
      throw ConsistencyError("e1 continued fraction did not converge");
    }

  }

  inline double e1_real( double x )
  {
    if ( !(x > 0.0) )
      throw DomainError("e1_real requires x > 0");
    return detail::e1_any( x );
  }

  inline Cplx e1_complex( Cplx w )
  {
    if ( !(w.real() > 0.0) )
      throw DomainError("e1_complex requires Re(w) > 0");
    return detail::e1_any( w );
  }

  //E2(x) = e^{-x} - x E1(x), the flux-weighted escape kernel of the slab.
  inline double e2_real( double x )
  {
    if ( x == 0.0 )
      return 1.0;
    if ( !(x > 0.0) )
      throw DomainError("e2_real requires x >= 0");
    return std::exp(-x) - x * detail::e1_any( x );
  }

  //Antiderivative of E1(mu t): F(t) = t E1(mu t) - exp(-mu t)/mu, with the
  //finite limit F(0) = -1/mu. Works for real mu > 0 and complex mu with
  //Re(mu) > 0 alike; the caller builds mu.
  template<class TScalar>
  TScalar e1_antiderivative( TScalar mu, double t )
  {
    if ( t == 0.0 )
      return TScalar(-1.0) / mu;
    return t * detail::e1_any( mu * t ) - std::exp( -mu * t ) / mu;
  }

  //Integral of E1(mu t) over the cell [a, b], 0 <= a < b.
  template<class TScalar>
  TScalar cell_integrated_e1( TScalar mu, double a, double b )
  {
    if ( !( a >= 0.0 && b > a ) )
      throw DomainError("cell_integrated_e1 requires 0 <= a < b");
    return e1_antiderivative( mu, b ) - e1_antiderivative( mu, a );
  }

  inline Cplx cell_integrated_e1( ComplexDecayRate mu, double a, double b )
  {
    return cell_integrated_e1( mu.mu, a, b );
  }

}

#endif
