#pragma once

#include <cstdint>

namespace weakdesc {

// Named points in the algorithms where a test scheduler may take control.
// Every shared-memory access is preceded by one of these.
enum class HookPoint : std::uint8_t {
  cell_read,
  cell_cas,
  slot_seq_odd,         // create_new: before the first seq increment
  slot_field_write,     // create_new: before each field store
  slot_seq_even,        // create_new: before the second seq increment
  slot_field_read,      // read_field / read_immutables: before a field load
  slot_seq_check,       // read_field / read_immutables: before the seq load
  slot_mutables_read,   // write_field / cas_field loop head
  slot_mutables_cas,
  dcss_published,       // dcss: publish CAS succeeded, before self-help
  dcss_help_begin,
  kcas_help_begin,
  kcas_lock_entry,      // before the dcss that locks one entry
  kcas_decided,         // after the state CAS, before phase 2
  kcas_unlock_entry,
};

class HookSink {
 public:
  virtual ~HookSink() = default;
  virtual void on_point(HookPoint point) = 0;
};

// Per-thread; null outside tests.
inline thread_local HookSink* t_hook_sink = nullptr;

inline void hook(HookPoint point) {
  if (HookSink* sink = t_hook_sink) [[unlikely]] {
    sink->on_point(point);
  }
}

}  // namespace weakdesc
