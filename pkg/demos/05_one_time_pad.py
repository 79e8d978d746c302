"""
Using a sifted key as a one-time pad
====================================
"""

from qkdsim.analysis import OneTimePad, OneTimePadError, otp_decrypt, otp_encrypt
from qkdsim.protocols import bb84_sift, run_bb84

alice_key, bob_key = bb84_sift(run_bb84(400, seed=5).records)
message = b"meet at dawn"
print(f"sifted {len(alice_key)} bits, message needs {8 * len(message)}")

ciphertext = otp_encrypt(message, OneTimePad(alice_key.bits))
print("ciphertext:", ciphertext.hex())
print("bob reads:", otp_decrypt(ciphertext, OneTimePad(bob_key.bits)))

pad = OneTimePad(alice_key.bits)
otp_encrypt(message, pad)
try:
    otp_encrypt(b"second message", pad)
except OneTimePadError as exc:
    print("refused:", exc)
