#ifndef CUTFUNQUE_TRANSFER_H_
#define CUTFUNQUE_TRANSFER_H_

#include <array>

namespace cutfunque::transfer {

// SMPTE ST 2084 EOTF: non-linear signal in [0,1] -> absolute luminance (nits).
double PqEotf(double signal);

// BT.2100 HLG inverse OETF: non-linear signal -> normalised scene light [0,1].
double HlgInverseOetf(double signal);

// BT.2100 HLG display gamma for a display with nominal peak `peak_nits`.
double HlgSystemGamma(double peak_nits);

// BT.1886 with zero black level: V in [0,1] -> nits.
double Bt1886Eotf(double signal, double peak_nits);

}  // namespace cutfunque::transfer

#endif  // CUTFUNQUE_TRANSFER_H_
