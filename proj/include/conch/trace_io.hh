// Line-oriented trace documents.
//
//   #consistency-trace v1 threads=t1,t2 unique=true spec=register
//   # free-form comment
//   t2 ld-inv
//   t2 ld-ret 1
//   t1 up 0 x 1
//   t1 com 0
//   env fwd t1 t2 0
//
// A line like `t2 ld 1` is a combined call event, a fused
// invocation/return pair recorded as one indivisible event; split_calls
// expands those where a checker needs the halves. Printing emits one line
// per event in the same grammar, so print(parse(doc)) == doc up to
// comments and whitespace.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "conch/checkers.hh"
#include "conch/trace.hh"

namespace conch {

struct TraceDocument {
  Trace trace;
  std::vector<std::string> declared_threads;
  bool unique_flag = false;
  std::string spec_name;  // empty when the header names none
};

// Throws ParseError with a 1-based line number on malformed input,
// undeclared threads, duplicate events under unique=true, misplaced env
// agents, or revision discipline violations.
TraceDocument parse_trace(const std::string& text);

// Normalized document for the trace: header with its sorted threads, the
// honestly computed unique flag, and one expanded event per line.
std::string print_trace(const Trace& t, const std::string& spec_name = "");

// Order certificates:
//   #order-certificate v1 events=5
//   vis 1 2
//   arb 1 2
struct CertificateDocument {
  OrderCertificate certificate;
  std::size_t events = 0;  // length of the trace it refers to
};

std::string print_certificate(const OrderCertificate& c, std::size_t events);
CertificateDocument parse_certificate(const std::string& text);

// True when the text starts with the certificate header.
bool looks_like_certificate(const std::string& text);

}  // namespace conch
