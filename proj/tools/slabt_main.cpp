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

//Command-line front end: picks a scenario, optionally loads a key = value
//configuration file, runs it and reports where the outputs went.

#include "slabt/scenario.hpp"
#include "CLI11.hpp"
#include <iostream>

int main( int argc, char** argv )
{
  CLI::App app{ "slab-transport scenario driver" };
  std::string config_path, scenario, output_dir;
  bool check = false, verbose = false;
  int threads = 0;

  std::string scenario_list;
  for ( const auto& n : slabt::scenario_names() )
    scenario_list += ( scenario_list.empty() ? "" : ", " ) + n;

  app.add_option( "-c,--config", config_path,
                  "configuration file (key = value lines)" );
  app.add_option( "-s,--scenario", scenario,
                  "scenario to run (" + scenario_list + ")" );
  app.add_option( "-o,--output-dir", output_dir,
                  "directory for CSV/JSON outputs (default: .)" );
  app.add_option( "-j,--threads", threads, "Eigen thread count" );
  app.add_flag( "--check", check,
                "exit nonzero if any embedded acceptance check fails" );
  app.add_flag( "-v,--verbose", verbose, "progress output on stderr" );
  CLI11_PARSE( app, argc, argv );

  try {
    slabt::RunConfig cfg;
    if ( !config_path.empty() )
      cfg = slabt::load_config( config_path );
    if ( !scenario.empty() )
      cfg.set( "scenario", scenario );
    if ( !output_dir.empty() )
      cfg.set( "output_dir", output_dir );
    if ( threads > 0 )
      cfg.set( "threads", std::to_string( threads ) );
    cfg.check = check;
    cfg.verbose = verbose;

    const slabt::ScenarioResult r = slabt::run_scenario( cfg );

    std::cout << "scenario " << r.scenario << " completed; wrote";
    for ( const auto& f : r.files )
      std::cout << " " << f;
    std::cout << " to " << cfg.output_dir << "\n";
    if ( !r.checks_passed ) {
      std::cout << "checks failed:\n";
      for ( const auto& f : r.failures )
        std::cout << "  " << f << "\n";
      if ( cfg.check )
        return 2;
    } else {
      std::cout << "all embedded checks passed\n";
    }
    return 0;
  } catch ( const std::exception& e ) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
