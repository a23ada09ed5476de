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
#ifndef slabt_core_hpp
#define slabt_core_hpp

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace slabt {

  using Vec = Eigen::VectorXd;
  using Mat = Eigen::MatrixXd;
  using VecC = Eigen::VectorXcd;
  using MatC = Eigen::MatrixXcd;
  using Cplx = std::complex<double>;
  using Eigen::Index;

  //Internal unit convention: E_i = 1, ell_dis = 1, densities in units of the
  //incident density. All module interfaces assume it.
  inline constexpr double kEi = 1.0;

  class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
  };

  //Bad user input or violated preconditions.
  class DomainError : public Error {
  public:
    using Error::Error;
  };

  //Iteration diverged, went negative, or broke a monotonicity contract.
  class InstabilityError : public Error {
  public:
    using Error::Error;
  };

  //Iteration ran out of budget without reaching the tolerance.
  class ConvergenceError : public Error {
  public:
    using Error::Error;
  };

  //An internal cross-check failed (e.g. an observable that must be real
  //came out complex); indicates a bug, not bad input.
  class ConsistencyError : public Error {
  public:
    using Error::Error;
  };

}

#endif
