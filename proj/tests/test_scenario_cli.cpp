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

#include "slabt/scenario.hpp"
#include "json.hpp"
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace slabt;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

  fs::path fresh_dir( const std::string& name )
  {
    const fs::path p = fs::path( "scenario_test_out" ) / name;
    fs::remove_all( p );
    fs::create_directories( p );
    return p;
  }

  void write_file( const fs::path& p, const std::string& text )
  {
    std::ofstream f( p, std::ios::binary | std::ios::trunc );
    f << text;
  }

  std::string read_file( const fs::path& p )
  {
    std::ifstream f( p, std::ios::binary );
    REQUIRE( bool( f ) );
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
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

}

TEST_CASE("configuration file loading")
{
  const fs::path dir = fresh_dir( "config" );

  write_file( dir / "good.cfg",
              "# sample configuration\n"
              "alpha = 0.02   # inline comment\n"
              "b = 5\n"
              "Nz = 80\n"
              "scenario = fig9a\n"
              "\n" );
  const RunConfig cfg = load_config( ( dir / "good.cfg" ).string() );
  CHECK( cfg.alpha == doctest::Approx( 0.02 ).epsilon( 1e-15 ) );
  CHECK( cfg.b == doctest::Approx( 5.0 ).epsilon( 1e-15 ) );
  CHECK( cfg.Nz == 80 );
  CHECK( cfg.scenario == "fig9a" );
  //untouched keys keep their defaults and are not marked as set
  CHECK( cfg.beta == doctest::Approx( 0.1 ).epsilon( 1e-15 ) );
  CHECK( cfg.is_set( "alpha" ) );
  CHECK( !cfg.is_set( "beta" ) );
  CHECK( !cfg.is_set( "NE" ) );

  write_file( dir / "unknown.cfg", "alpha = 0.01\nfoo = 1\nbar = 2\n" );
  CHECK_THROWS_WITH_AS( load_config( ( dir / "unknown.cfg" ).string() ),
                        doctest::Contains( "foo" ), DomainError );

  write_file( dir / "malformed.cfg", "justtext\n" );
  CHECK_THROWS_WITH_AS( load_config( ( dir / "malformed.cfg" ).string() ),
                        doctest::Contains( "line 1" ), DomainError );

  write_file( dir / "badvalue.cfg", "alpha = abc\n" );
  CHECK_THROWS_AS( load_config( ( dir / "badvalue.cfg" ).string() ),
                   DomainError );

  write_file( dir / "badb.cfg", "b = -3\n" );
  CHECK_THROWS_WITH_AS( load_config( ( dir / "badb.cfg" ).string() ),
                        doctest::Contains( "positive" ), DomainError );

  CHECK_THROWS_AS( load_config( ( dir / "missing.cfg" ).string() ),
                   DomainError );

  RunConfig c;
  CHECK_THROWS_AS( c.set( "nonsense", "1" ), DomainError );
  c.set( "scenario", "nope" );
  CHECK_THROWS_AS( c.validate(), DomainError );

  RunConfig none;
  CHECK_THROWS_AS( run_scenario( none ), DomainError );
}

TEST_CASE("conservation scenario end to end, deterministic outputs")
{
  RunConfig cfg;
  cfg.set( "scenario", "conservation" );
  const fs::path d1 = fresh_dir( "cons1" );
  cfg.set( "output_dir", d1.string() );
  const ScenarioResult r = run_scenario( cfg );
  CHECK( r.checks_passed );
  CHECK( r.failures.empty() );

  const json sum = json::parse( read_file( d1 / "summary.json" ) );
  CHECK( sum.at( "particle_residual_max" ).get<double>() <= 1e-6 * 0.01 );
  CHECK( sum.at( "energy_residual_max" ).get<double>() <= 1e-6 * 0.01 );
  CHECK( sum.at( "reversibility_residual_max" ).get<double>() <= 1e-14 );
  CHECK( sum.at( "elastic_loss_defect" ).get<double>() <= 1e-8 );
  CHECK( sum.at( "elastic_gain_defect" ).get<double>() <= 1e-8 );
  CHECK( sum.at( "mb_residual_max" ).get<double>() <= 1e-4 );

  const json man = json::parse( read_file( d1 / "manifest.json" ) );
  CHECK( man.at( "completed" ).get<bool>() );
  CHECK( man.at( "scenario" ).get<std::string>() == "conservation" );
  CHECK( man.at( "checks" ).at( "passed" ).get<bool>() );
  CHECK( man.at( "config" ).at( "alpha" ).get<double>() == 0.01 );

  //the manifest checksum matches the bytes on disk
  const std::string bytes = read_file( d1 / "summary.json" );
  char hex[24];
  std::snprintf( hex, sizeof hex, "%016llx",
                 static_cast<unsigned long long>( fnv1a64( bytes ) ) );
  CHECK( man.at( "files" ).at( "summary.json" ).at( "fnv1a64" )
         .get<std::string>() == hex );

  //identical configuration, identical bytes
  const fs::path d2 = fresh_dir( "cons2" );
  cfg.set( "output_dir", d2.string() );
  run_scenario( cfg );
  CHECK( read_file( d2 / "summary.json" ) == bytes );
}

TEST_CASE("curve scenario writes well-formed CSV")
{
  RunConfig cfg;
  cfg.set( "scenario", "fig9a" );
  //override the scenario presets with a small slab for speed
  cfg.set( "alpha", "0.02" );
  cfg.set( "b", "5" );
  cfg.set( "Nz", "80" );
  cfg.set( "NE", "40" );
  const fs::path dir = fresh_dir( "fig9a" );
  cfg.set( "output_dir", dir.string() );
  const ScenarioResult r = run_scenario( cfg );
  //flux identities hold at rounding on any grid
  CHECK( r.checks_passed );

  const std::string csv = read_file( dir / "flux_decomposition.csv" );
  CHECK( csv.find( '\r' ) == std::string::npos );
  std::istringstream lines( csv );
  std::string header;
  std::getline( lines, header );
  CHECK( header == "z,J_total,J_elastic,J_inelastic,J_linear" );
  int rows = 0;
  std::string line;
  while ( std::getline( lines, line ) ) {
    ++rows;
    CHECK( std::count( line.begin(), line.end(), ',' ) == 4 );
  }
  CHECK( rows == 80 );

  const json man = json::parse( read_file( dir / "manifest.json" ) );
  CHECK( man.at( "curve_files" ).get<int>() == 1 );
  CHECK( man.at( "config" ).at( "b" ).get<double>() == 5.0 );
  CHECK( man.at( "stage_seconds" ).contains( "ladder" ) );
}

TEST_CASE("reciprocity scenario passes its embedded check")
{
  RunConfig cfg;
  cfg.set( "scenario", "linear-cbs" );
  cfg.set( "b", "5" );
  cfg.set( "Nz", "100" );
  const fs::path dir = fresh_dir( "cbs" );
  cfg.set( "output_dir", dir.string() );
  const ScenarioResult r = run_scenario( cfg );
  CHECK( r.checks_passed );
  const json sum = json::parse( read_file( dir / "summary.json" ) );
  CHECK( sum.at( "reciprocity_defect" ).get<double>() <= 1e-3 );
  CHECK( sum.at( "gamma_L" ).get<double>()
         > sum.at( "gamma_C" ).get<double>() );
  const json man = json::parse( read_file( dir / "manifest.json" ) );
  CHECK( man.at( "curve_files" ).get<int>() == 0 );

  //explicit nonzero couplings contradict the scenario definition
  RunConfig bad;
  bad.set( "scenario", "linear-cbs" );
  bad.set( "alpha", "0.01" );
  bad.set( "output_dir", fresh_dir( "cbs_bad" ).string() );
  CHECK_THROWS_AS( run_scenario( bad ), DomainError );
}

TEST_CASE("aborted runs leave a marker instead of a manifest")
{
  RunConfig cfg;
  cfg.set( "scenario", "fig9a" );
  cfg.set( "alpha", "0.02" );
  cfg.set( "b", "5" );
  cfg.set( "Nz", "50" );
  cfg.set( "NE", "20" );
  cfg.set( "max_iters", "2" );
  const fs::path dir = fresh_dir( "aborted" );
  cfg.set( "output_dir", dir.string() );
  CHECK_THROWS_AS( run_scenario( cfg ), ConvergenceError );
  CHECK( fs::exists( dir / "run_failed.txt" ) );
  CHECK( !fs::exists( dir / "manifest.json" ) );
  const std::string marker = read_file( dir / "run_failed.txt" );
  CHECK( marker.find( "fig9a" ) != std::string::npos );
}
