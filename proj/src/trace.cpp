#include "morph/trace.hpp"

namespace morph {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Begin: return "begin";
    case EventKind::Read: return "read";
    case EventKind::Write: return "write";
    case EventKind::SchemaRead: return "schema_read";
    case EventKind::SchemaWrite: return "schema_write";
    case EventKind::SchemaRevoke: return "schema_revoke";
    case EventKind::Commit: return "commit";
    case EventKind::Abort: return "abort";
    case EventKind::Outcome: return "outcome";
  }
  return "?";
}

}  // namespace morph
