#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phasemon/core_model.hpp"
#include "phasemon/errors.hpp"
#include "phasemon/types.hpp"

namespace phasemon {

enum class MigrationReason { over_util, under_util };

inline std::string_view to_string(MigrationReason r) {
  return r == MigrationReason::over_util ? "over_util" : "under_util";
}

struct MigrationEvent {
  std::uint64_t interval_index = 0;
  std::string process;
  std::string from_core;
  std::string to_core;
  MigrationReason reason = MigrationReason::over_util;

  friend bool operator==(const MigrationEvent&, const MigrationEvent&) = default;
};

struct CoreSlot {
  CoreSpec spec;
  std::optional<std::string> occupant;
};

/// Cores, their occupants and pending migration stalls.
///
/// Each process sits on exactly one core and each core hosts at most one
/// process.
struct MachineState {
  std::vector<CoreSlot> cores;
  std::map<std::string, std::string> assignment;  // process -> core name
  Cycles migration_penalty = 10000;
  std::map<std::string, Cycles> pending_stall;     // process -> cycles still owed

  static MachineState from_specs(std::vector<CoreSpec> specs, Cycles migration_penalty = 10000) {
    MachineState m;
    m.migration_penalty = migration_penalty;
    for (auto& s : specs) {
      s.validate();
      if (m.find(s.name)) throw ValidationError("duplicate core name '" + s.name + "'");
      m.cores.push_back(CoreSlot{std::move(s), std::nullopt});
    }
    if (m.cores.empty()) throw ValidationError("machine has no cores");
    return m;
  }

  // Two A-type and two B-type cores.
  static MachineState table1(Cycles migration_penalty = 10000) {
    return from_specs({CoreSpec::a_type("A0"), CoreSpec::a_type("A1"), CoreSpec::b_type("B0"), CoreSpec::b_type("B1")},
                      migration_penalty);
  }

  const CoreSlot* find(std::string_view core) const {
    auto it = std::find_if(cores.begin(), cores.end(), [&](const CoreSlot& c) { return c.spec.name == core; });
    return it == cores.end() ? nullptr : &*it;
  }

  CoreSlot* find(std::string_view core) {
    return const_cast<CoreSlot*>(std::as_const(*this).find(core));
  }

  void place(const std::string& process, const std::string& core) {
    if (assignment.count(process)) throw SchedulingConflict("process '" + process + "' is already placed");
    CoreSlot* slot = find(core);
    if (!slot) throw ValidationError("unknown core '" + core + "'");
    if (slot->occupant) throw SchedulingConflict("core '" + core + "' is occupied");
    slot->occupant = process;
    assignment[process] = core;
  }

  const CoreSpec& core_of(const std::string& process) const {
    auto it = assignment.find(process);
    if (it == assignment.end()) throw UsageError("process '" + process + "' is not placed");
    return find(it->second)->spec;
  }

  // Hands out the stall owed by `process`, at most `limit` cycles of it.
  Cycles consume_stall(const std::string& process, Cycles limit) {
    auto it = pending_stall.find(process);
    if (it == pending_stall.end()) return 0;
    const Cycles n = std::min(limit, it->second);
    it->second -= n;
    if (it->second == 0) pending_stall.erase(it);
    return n;
  }
};

/// Picks a migration for a utilization-driven phase change: over-utilization
/// moves the process up to a free A core, under-utilization down to a free B
/// core. Lowest-index free core wins. Other event kinds never migrate.
inline std::optional<MigrationEvent> decide_migration(const PhaseEvent& event, const CoreSpec& current_core,
                                                      const MachineState& machine, const std::string& process) {
  CoreClass target;
  MigrationReason reason;
  if (event.kind == PhaseEventKind::over_utilization) {
    if (current_core.core_class == CoreClass::A) return std::nullopt;
    target = CoreClass::A;
    reason = MigrationReason::over_util;
  } else if (event.kind == PhaseEventKind::under_utilization) {
    if (current_core.core_class == CoreClass::B) return std::nullopt;
    target = CoreClass::B;
    reason = MigrationReason::under_util;
  } else {
    return std::nullopt;
  }
  for (const auto& slot : machine.cores) {
    if (slot.spec.core_class == target && !slot.occupant && slot.spec.name != current_core.name)
      return MigrationEvent{event.interval_index, process, current_core.name, slot.spec.name, reason};
  }
  return std::nullopt;
}

/// Moves the process and charges the migration stall to its next interval.
inline MachineState apply_migration(MachineState machine, const MigrationEvent& m) {
  if (m.from_core == m.to_core) throw UsageError("migration source and target are the same core");
  CoreSlot* to = machine.find(m.to_core);
  CoreSlot* from = machine.find(m.from_core);
  if (!to || !from) throw UsageError("migration names an unknown core");
  if (to->occupant) throw SchedulingConflict("core '" + m.to_core + "' is occupied by '" + *to->occupant + "'");
  auto it = machine.assignment.find(m.process);
  if (it == machine.assignment.end() || it->second != m.from_core)
    throw SchedulingConflict("process '" + m.process + "' is not on core '" + m.from_core + "'");
  from->occupant.reset();
  to->occupant = m.process;
  it->second = m.to_core;
  if (machine.migration_penalty > 0) machine.pending_stall[m.process] += machine.migration_penalty;
  return machine;
}

}  // namespace phasemon
