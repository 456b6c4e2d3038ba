#include <sstream>

#include "doctest.h"
#include "fima/common.hpp"
#include "fima/trace.hpp"
#include "test_util.hpp"

using namespace fima;

namespace {

IterateTrace sample_trace() {
  IterateTrace t;
  const double objs[] = {3.0, 1.0 / 3.0, 1e-300, kInfiniteObjective};
  for (int k = 0; k < 4; ++k) {
    IterateRecord r;
    r.k = k + 1;
    r.objective = objs[k];
    r.iter_error = 0.1 / (k + 1.0) + 1e-17;
    r.recon_error = r.iter_error * r.iter_error;
    r.policy = k % 2 ? Policy::Fallback : Policy::Accept;
    if (k >= 2) r.block = k - 2;
    r.wall_ms = 0.125 * k;
    t.push(r);
  }
  t.stop = StopReason::Budget;
  return t;
}

IterateTrace one_record(int k, double err) {
  IterateTrace t;
  IterateRecord r;
  r.k = k;
  r.iter_error = err;
  t.push(r);
  return t;
}

}  // namespace

TEST_CASE("stopping rule examples") {
  CHECK(stopping(one_record(3, 5e-5), 80, 1e-4) == StopReason::Tolerance);
  CHECK(stopping(one_record(3, 2e-4), 80, 1e-4) == StopReason::None);
  CHECK(stopping(one_record(80, 2e-4), 80, 1e-4) == StopReason::Budget);
  CHECK(stopping(one_record(80, 1e-5), 80, 1e-4) == StopReason::Tolerance);
  CHECK_THROWS_AS(stopping(IterateTrace{}, 80, 1e-4), InvalidArgument);
}

TEST_CASE("iteration error uses the absolute change at the origin") {
  CHECK(iteration_error(2.0, 4.0) == 0.5);
  CHECK(iteration_error(2.0, 0.0) == 2.0);
}

TEST_CASE("CSV round trip is field exact") {
  const IterateTrace t = sample_trace();
  std::stringstream ss;
  write_trace_csv(t, ss);
  const std::string text = ss.str();
  CHECK(text.rfind("k,objective,iter_error,recon_error,policy,block,wall_ms\n", 0) == 0);
  CHECK(text.find("accept") != std::string::npos);
  CHECK(text.find("fallback") != std::string::npos);
  const IterateTrace back = parse_trace_csv(ss);
  CHECK(same_serialized_fields(t, back));
  // uni-block rows leave the block column empty
  CHECK(text.find(",accept,,") != std::string::npos);
}

TEST_CASE("JSON round trip is field exact") {
  const IterateTrace t = sample_trace();
  std::stringstream ss;
  write_trace_json(t, ss);
  const IterateTrace back = parse_trace_json(ss);
  CHECK(same_serialized_fields(t, back));
  CHECK(back.stop == StopReason::Budget);
}

TEST_CASE("randomised CSV round trips") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Vec v = testing::random_vec(s, 40, -1e6, 1e6);
    IterateTrace t;
    for (int i = 0; i < 10; ++i) {
      IterateRecord r;
      r.k = i;
      r.objective = v[4 * i];
      r.iter_error = std::abs(v[4 * i + 1]) * 1e-9;
      r.recon_error = v[4 * i + 2] / 3.0;
      r.wall_ms = std::abs(v[4 * i + 3]);
      r.policy = v[4 * i] > 0 ? Policy::Accept : Policy::Fallback;
      t.push(r);
    }
    std::stringstream ss;
    write_trace_csv(t, ss);
    CHECK(same_serialized_fields(t, parse_trace_csv(ss)));
  }
}

TEST_CASE("malformed trace files are rejected") {
  std::stringstream bad_header("k,objective\n1,2\n");
  CHECK_THROWS_AS(parse_trace_csv(bad_header), InputError);
  std::stringstream bad_row(std::string(kTraceCsvHeader) + "\n1,2,3\n");
  CHECK_THROWS_AS(parse_trace_csv(bad_row), InputError);
  std::stringstream bad_policy(std::string(kTraceCsvHeader) + "\n1,2,3,4,maybe,,0\n");
  CHECK_THROWS_AS(parse_trace_csv(bad_policy), InputError);
  std::stringstream bad_json("{not json");
  CHECK_THROWS_AS(parse_trace_json(bad_json), InputError);
}
