#include "support/oracle_replay.hpp"

#include <doctest.h>

#include <set>

using namespace altmax::testing;

TEST_CASE("bounds agree with the high-precision oracle") {
  const auto rows = load_oracle(std::string(ALTMAX_TEST_DATA) + "/bounds_oracle.csv");
  REQUIRE(rows.size() > 1000);
  std::set<std::string> ops;
  for (const auto& r : rows) {
    const OracleOutcome o = replay_row(r, 1e-12);
    INFO("line " << r.line << " op " << r.op << " got " << o.got << " expected " << r.expected << " "
                 << o.note);
    CHECK(o.pass);
    ops.insert(r.op);
  }
  CHECK(ops.size() == 23);
}
