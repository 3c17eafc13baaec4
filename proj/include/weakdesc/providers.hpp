#pragma once

#include <cstddef>
#include <string_view>

#include "weakdesc/dcss.hpp"
#include "weakdesc/kcas.hpp"
#include "weakdesc/process.hpp"
#include "weakdesc/wasteful.hpp"
#include "weakdesc/weak_descriptor.hpp"

namespace weakdesc {

struct SystemOptions {
  std::size_t max_processes = kMaxProcesses;
  std::size_t kmax = kDefaultKmax;
  unsigned seq_bits = DescriptorHandle::kSeqBits;  // reuse only
  bool quarantine = false;                         // wasteful only
  unsigned advance_interval = 64;                  // wasteful only
  DcssHelpStyle dcss_help = DcssHelpStyle::read_immutables;
};

// Everything one k-CAS instance needs with reusable per-process slots.
class ReuseSystem {
 public:
  using Store = DescriptorTable;
  static constexpr std::string_view kName = "reuse";

  explicit ReuseSystem(const SystemOptions& o = {})
      : registry(o.max_processes),
        ledger(o.max_processes),
        dcss_table(dcss_schema(), registry, &ledger, TableOptions{o.seq_bits}),
        kcas_table(kcas_schema(o.kmax), registry, &ledger, TableOptions{o.seq_bits}),
        kcas(dcss_table, kcas_table, KcasOptions{o.kmax, o.dcss_help}) {}

  std::uint64_t canary_hits() const { return 0; }

  ProcessRegistry registry;
  FootprintLedger ledger;
  DescriptorTable dcss_table;
  DescriptorTable kcas_table;
  Kcas<DescriptorTable> kcas;
};

// The allocate-per-operation baseline with epoch-based reclamation.
class WastefulSystem {
 public:
  using Store = AllocatingTable;
  static constexpr std::string_view kName = "wasteful";

  explicit WastefulSystem(const SystemOptions& o = {})
      : registry(o.max_processes),
        ledger(o.max_processes),
        reclaimer(registry, &ledger, ReclaimerOptions{o.advance_interval, o.quarantine}),
        dcss_table(dcss_schema(), registry, reclaimer),
        kcas_table(kcas_schema(o.kmax), registry, reclaimer),
        kcas(dcss_table, kcas_table, KcasOptions{o.kmax, o.dcss_help}) {}

  std::uint64_t canary_hits() const {
    return dcss_table.canary_hits() + kcas_table.canary_hits();
  }

  ProcessRegistry registry;
  FootprintLedger ledger;
  EpochReclaimer reclaimer;
  AllocatingTable dcss_table;
  AllocatingTable kcas_table;
  Kcas<AllocatingTable> kcas;
};

extern template class Dcss<DescriptorTable>;
extern template class Dcss<AllocatingTable>;
extern template class Kcas<DescriptorTable>;
extern template class Kcas<AllocatingTable>;

}  // namespace weakdesc
