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
#ifndef slabt_scenario_hpp
#define slabt_scenario_hpp

#include "slabt/crossed_solver.hpp"
#include <set>
#include <string>

//Configuration loading, named scenario execution, structured CSV/JSON
//output and run reproducibility metadata (manifest with per-stage timings
//and file checksums).

namespace slabt {

  inline constexpr const char* kArtifactVersion = "0.1.0";

  //flat key = value configuration; every field has a documented default so
  //an empty file is a valid configuration
  struct RunConfig {
    double alpha = 0.01;   //inelastic-collision parameter
    double beta = 0.1;     //mean-field (elastic) collision parameter
    double k_ell = 10.0;   //weak-disorder parameter
    double b = 10.0;       //slab optical thickness
    Index Nz = 200;
    Index NE = 100;
    double E_max = 5.0;
    double damping = 0.5;  //ladder iteration damping
    double tol = 1e-8;
    int max_iters = 60000;
    double crossed_target_h = 0.025;
    double crossed_tol = 1e-10;
    int crossed_max_iters = 2000;
    int threads = 1;
    long seed = 0;         //reserved; every computation is deterministic
    std::string scenario;
    std::string output_dir = ".";
    bool check = false;    //enforce the embedded acceptance thresholds
    bool verbose = false;

    //keys assigned explicitly (file or command line); scenario presets only
    //fill keys that are not in this set
    std::set<std::string> touched;

    //parses and assigns one key; unknown key or unparsable value throws
    void set( const std::string& key, const std::string& value );
    bool is_set( const std::string& key ) const
    {
      return touched.count( key ) != 0;
    }
    void validate() const;
  };

  //parses a flat key-value file ("#" starts a comment); unknown keys are
  //collected and reported together
  RunConfig load_config( const std::string& path );

  const std::vector<std::string>& scenario_names();

  struct ScenarioResult {
    std::string scenario;
    std::vector<std::string> files;      //emitted names, relative to output_dir
    bool checks_passed = true;
    std::vector<std::string> failures;   //descriptions of failed checks
  };

  //runs one named scenario: writes the curve CSVs, a summary.json of named
  //scalars plus a convergence block, and manifest.json (config echo,
  //artifact version, stage timings, convergence summaries, checksums).
  //The manifest is written iff the run completed; on a solver failure a
  //run_failed.txt marker is left next to any partial outputs instead.
  //Check outcomes are evaluated always; cfg.check only gates the caller's
  //exit status through ScenarioResult::checks_passed.
  ScenarioResult run_scenario( const RunConfig& cfg );

}

#endif
