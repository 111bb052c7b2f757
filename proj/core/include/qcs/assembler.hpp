#pragma once

#include <string>

#include "qcs/isa.hpp"

namespace qcs {

// Text assembly, one instruction per line:
//
//   ch0: STA a=0.5 d=20 env=1 on if m[3]==1
//   ch0: STF f=100MHz d=1 off
//   ch1: WAIT 100 off
//   ch0: RDO table=2 d=1000
//
// '#' starts a comment. Durations take cycle counts (d=20) or times with
// an SI suffix (d=500ns) that must land on the 5 ns cycle grid. Frequencies
// accept Hz/kHz/MHz/GHz or a raw tuning word (ftw=), amplitudes a signed
// fraction (a=) or a raw word (aw=), phases deg/rad/turn (p=) or a raw
// word (pw=). 'on'/'off' sets the emit flag; 'if m[K]==V' guards the
// instruction on measurement register bit K.
//
// Errors: SyntaxError (with line and column), UnknownMnemonic, and
// FieldRangeError for values outside a field's range.
Program assemble(const std::string& source);

// Canonical text form; assemble(disassemble(p)) == p for canonical
// programs. Raw words are printed for amplitude/frequency/phase so the
// round trip is exact.
std::string disassemble(const Program& program);

Program load_program_any(const std::string& path);  // .qcp or assembly text

// Unit conversions shared by the assembler, tools, and experiments.
uint32_t frequency_to_ftw(double hz);             // round(hz / fs * 2^32)
double ftw_to_frequency(uint32_t ftw);            // ftw * fs / 2^32
int16_t amplitude_to_word(double fraction);       // round(a * 32768), range checked
double word_to_amplitude(int16_t word);           // word / 32768
uint16_t phase_turns_to_word(double turns);       // round(turns * 65536) mod 2^16
double word_to_phase_turns(uint16_t word);        // word / 65536
uint64_t seconds_to_cycles(double seconds);       // must land on the cycle grid

}  // namespace qcs
