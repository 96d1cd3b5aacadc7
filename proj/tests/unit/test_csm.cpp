#include <doctest.h>

#include <random>

#include "edgesched/core/errors.hpp"
#include "edgesched/csm/csm.hpp"
#include "support/csm_oracle.hpp"

using namespace edgesched;
using namespace edgesched::csm;

namespace {

Host host(HostId id, double cpu) {
  Host h;
  h.id = id;
  h.capacity = {cpu, 1e6, 1e6, 1e6};
  return h;
}

Task task(TaskId id, double cpu, std::optional<HostId> on = std::nullopt) {
  Task t;
  t.id = id;
  t.total_duration = 600;
  t.demand = {cpu, 1, 1, 1};
  t.assigned_host = on;
  return t;
}

Placement made(Role role, int rank, bool blocked_migration = false) {
  Placement p;
  p.role = role;
  p.host = 0;
  p.rank = rank;
  p.blocked_migration = blocked_migration;
  return p;
}

}  // namespace

TEST_CASE("all first choices fit") {
  const std::vector<Host> hosts{host(0, 1000), host(1, 1000)};
  TaskMap tasks{{1, task(1, 100)}, {2, task(2, 100)}};
  TaskSets sets;
  sets.active = sets.arriving = {1, 2};
  RankedAction r{{{1, {1, 0}}, {2, {0, 1}}}};
  const auto a = constrain_action(r, tasks, hosts, sets);
  REQUIRE(a.placements.size() == 2);
  CHECK(*a.placements[0].host == 1);
  CHECK(*a.placements[1].host == 0);
  CHECK(a.placements[0].rank == 0);
  CHECK(a.placements[1].rank == 0);
  CHECK(penalty(a) == 0);
}

TEST_CASE("full first choice falls through to the second") {
  const std::vector<Host> hosts{host(0, 1000), host(1, 1000)};
  TaskMap tasks{{1, task(1, 900, 0)}, {2, task(2, 200)}};
  TaskSets sets;
  sets.active = {1, 2};
  sets.arriving = {2};
  RankedAction r{{{2, {0, 1}}}};
  const auto a = constrain_action(r, tasks, hosts, sets);
  const auto* p = a.find(2);
  REQUIRE(p);
  CHECK(*p->host == 1);
  CHECK(p->rank == 1);
  CHECK(a.find(1)->role == Role::Blocked);
}

TEST_CASE("sequential filling resolves to (0, 0, 1)") {
  const std::vector<Host> hosts{host(0, 1000), host(1, 1000)};
  TaskMap tasks{{1, task(1, 400)}, {2, task(2, 400)}, {3, task(3, 400)}};
  TaskSets sets;
  sets.active = sets.arriving = {1, 2, 3};
  RankedAction r{{{1, {0, 1}}, {2, {0, 1}}, {3, {0, 1}}}};
  const auto a = constrain_action(r, tasks, hosts, sets);
  CHECK(a.placements[0].rank == 0);
  CHECK(a.placements[1].rank == 0);
  CHECK(a.placements[2].rank == 1);

  testsupport::CsmInstance in{hosts, tasks, sets, r};
  const auto oracle = testsupport::brute_force_constrain(in);
  REQUIRE(oracle.size() == 3);
  CHECK(oracle[2].rank == 1);
}

TEST_CASE("unplaceable tasks defer or stay") {
  const std::vector<Host> hosts{host(0, 100), host(1, 100)};
  TaskMap tasks{{1, task(1, 500, 1)}, {2, task(2, 500)}};
  TaskSets sets;
  sets.active = {1, 2};
  sets.arriving = {2};
  sets.migratable = {1};
  RankedAction r{{{1, {0, 1}}, {2, {1, 0}}}};
  const auto a = constrain_action(r, tasks, hosts, sets);
  const auto* stay = a.find(1);
  CHECK(*stay->host == 1);
  CHECK(stay->fallback);
  CHECK(stay->rank == 2);
  const auto* deferred = a.find(2);
  CHECK_FALSE(deferred->host);
  CHECK(deferred->rank == 2);
  CHECK(a.deferred_count() == 1);
  CHECK(respects_capacity(a, tasks, hosts));
}

TEST_CASE("blocked tasks keep their host and may record a blocked move") {
  const std::vector<Host> hosts{host(0, 1000), host(1, 1000)};
  TaskMap tasks{{1, task(1, 100, 1)}};
  TaskSets sets;
  sets.active = {1};
  RankedAction r{{{1, {0, 1}}}};
  auto a = constrain_action(r, tasks, hosts, sets);
  CHECK(*a.placements[0].host == 1);
  CHECK(a.placements[0].blocked_migration);
  CHECK(penalty(a) == 1.0);

  r.rows[0].hosts = {1, 0};
  a = constrain_action(r, tasks, hosts, sets);
  CHECK_FALSE(a.placements[0].blocked_migration);
  CHECK(penalty(a) == 0);

  a = constrain_action(RankedAction{}, tasks, hosts, sets);
  CHECK_FALSE(a.placements[0].blocked_migration);
}

TEST_CASE("penalty examples") {
  ConstrainedAction a;
  a.host_count = 3;
  a.placements = {made(Role::New, 0), made(Role::Migratable, 2)};
  CHECK(penalty(a) == doctest::Approx(1.0 / 3).epsilon(1e-12));

  a.placements = {made(Role::New, 0), made(Role::Blocked, 2, true)};
  CHECK(penalty(a) == doctest::Approx(5.0 / 6).epsilon(1e-12));

  CHECK(penalty(ConstrainedAction{}) == 0);
}

TEST_CASE("malformed rankings are rejected") {
  const std::vector<Host> hosts{host(0, 1000), host(1, 1000)};
  TaskMap tasks{{1, task(1, 100)}};
  TaskSets sets;
  sets.active = sets.arriving = {1};
  CHECK_THROWS_AS(constrain_action(RankedAction{{{1, {0}}}}, tasks, hosts, sets), InvariantViolation);
  CHECK_THROWS_AS(constrain_action(RankedAction{{{1, {0, 0}}}}, tasks, hosts, sets), InvariantViolation);
  CHECK_THROWS_AS(constrain_action(RankedAction{{{1, {0, 1}}, {1, {1, 0}}}}, tasks, hosts, sets),
                  InvariantViolation);
  CHECK_THROWS_AS(constrain_action(RankedAction{{{7, {0, 1}}}}, tasks, hosts, sets), InvariantViolation);
  CHECK_THROWS_AS(constrain_action(RankedAction{}, tasks, hosts, sets), InvariantViolation);
}

TEST_CASE("row_with_first puts the chosen host first") {
  const auto row = row_with_first(5, 2, 4);
  CHECK(row.task == 5);
  CHECK(row.hosts == std::vector<HostId>{2, 0, 1, 3});
}

TEST_CASE("constrain_action and penalty match the brute-force oracle") {
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto in = testsupport::random_csm_instance(rng, 4, 4);
    const auto got = constrain_action(in.ranked, in.tasks, in.hosts, in.sets);
    const auto want = testsupport::brute_force_constrain(in);
    REQUIRE(want.size() == got.placements.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
      const auto& p = got.placements[k];
      REQUIRE(p.host == want[k].host);
      REQUIRE(p.rank == want[k].rank);
      REQUIRE(p.blocked_migration == want[k].blocked_migration);
    }
    const double pen = penalty(got);
    REQUIRE(pen == doctest::Approx(testsupport::brute_force_penalty(want, static_cast<int>(in.hosts.size()))).epsilon(1e-12));
    REQUIRE(pen >= 0);
    REQUIRE(pen <= 2);
    REQUIRE(respects_capacity(got, in.tasks, in.hosts));

    bool perfect = true;
    for (const auto& p : got.placements) perfect = perfect && p.rank == 0 && !p.blocked_migration;
    REQUIRE((pen == 0) == perfect);
    ++checked;
  }
  CHECK(checked >= 1000);
}

TEST_CASE("committed loads add up placements") {
  const std::vector<Host> hosts{host(0, 1000), host(1, 1000)};
  TaskMap tasks{{1, task(1, 100)}, {2, task(2, 250)}};
  TaskSets sets;
  sets.active = sets.arriving = {1, 2};
  const auto a = constrain_action(RankedAction{{{1, {1, 0}}, {2, {1, 0}}}}, tasks, hosts, sets);
  const auto load = committed_loads(a, tasks, 2);
  CHECK(load[0].cpu_mips == 0);
  CHECK(load[1].cpu_mips == 350);
}
