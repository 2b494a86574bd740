"""Embedded elliptic band-pass coefficients (generated file).

Fourth-order elliptic band-pass per pitch band at 16 kHz:
0.5 dB passband ripple, per-band stopband attenuation (ATTEN_DB).
Regenerate with tools/gen_filter_coeffs.py; do not edit by hand.
"""
import numpy as np

SAMPLE_RATE = 16000
RIPPLE_DB = 0.5
# per-band stopband attenuation (dB), index-aligned with BAND_SOS
ATTEN_DB = [27.0, 33.0, 27.0, 33.0, 27.0, 33.0, 27.0, 33.0]

# One (2, 6) second-order-section array per band S1..S8,
# rows are (b0, b1, b2, 1, a1, a2).
BAND_SOS = [
    # [50, 75) Hz
    np.array([
        [np.float64(0.044398668359778265), np.float64(-0.08861052931062123), np.float64(0.044398668359778244), np.float64(1.0), np.float64(-1.9909184043747374), np.float64(0.9917951611053721)],
        [np.float64(1.0), np.float64(-1.9999205849274408), np.float64(0.9999999999999998), np.float64(1.0), np.float64(-1.9942239433304971), np.float64(0.994602750268963)],
    ]),
    # [75, 100) Hz
    np.array([
        [np.float64(0.02226720360238612), np.float64(-0.0443484965915288), np.float64(0.022267203602386123), np.float64(1.0), np.float64(-1.9905655793167933), np.float64(0.9921106450312902)],
        [np.float64(1.0), np.float64(-1.9998400540724113), np.float64(1.0000000000000004), np.float64(1.0), np.float64(-1.9932520499535067), np.float64(0.9941117172683038)],
    ]),
    # [100, 150) Hz
    np.array([
        [np.float64(0.04419843015271951), np.float64(-0.08765477160176019), np.float64(0.044198430152719514), np.float64(1.0), np.float64(-1.980167898016993), np.float64(0.9836598325489871)],
        [np.float64(1.0), np.float64(-1.9996824042698065), np.float64(1.0000000000000002), np.float64(1.0), np.float64(-1.987722522278377), np.float64(0.9892335219951398)],
    ]),
    # [150, 200) Hz
    np.array([
        [np.float64(0.02221577808587105), np.float64(-0.043693152787104825), np.float64(0.022215778085871045), np.float64(1.0), np.float64(-1.9781327667290234), np.float64(0.9842863719306294)],
        [np.float64(1.0), np.float64(-1.9993604794693938), np.float64(1.0), np.float64(1.0), np.float64(-1.9848284842664758), np.float64(0.9882563084646806)],
    ]),
    # [200, 300) Hz
    np.array([
        [np.float64(0.044000862284725495), np.float64(-0.08507452505602056), np.float64(0.044000862284725495), np.float64(1.0), np.float64(-1.9537614227789806), np.float64(0.9676039182659899)],
        [np.float64(1.0), np.float64(-1.9987306498604784), np.float64(0.9999999999999999), np.float64(1.0), np.float64(-1.9725649409818085), np.float64(0.9785741784822599)],
    ]),
    # [300, 400) Hz
    np.array([
        [np.float64(0.022313126852256886), np.float64(-0.04171501527951317), np.float64(0.022313126852256882), np.float64(1.0), np.float64(-1.9444570263264354), np.float64(0.9688420498261607)],
        [np.float64(1.0), np.float64(-1.9974461270807036), np.float64(1.0000000000000004), np.float64(1.0), np.float64(-1.9630170235567905), np.float64(0.9766362951101384)],
    ]),
    # [400, 600) Hz
    np.array([
        [np.float64(0.044380345352304604), np.float64(-0.07738115423857081), np.float64(0.044380345352304604), np.float64(1.0), np.float64(-1.882091147750864), np.float64(0.9363912301730887)],
        [np.float64(1.0), np.float64(-1.9949391124323292), np.float64(0.9999999999999998), np.float64(1.0), np.float64(-1.9337946102505568), np.float64(0.9575384401442998)],
    ]),
    # [600, 800) Hz
    np.array([
        [np.float64(0.023271018770658514), np.float64(-0.03524261780272948), np.float64(0.023271018770658514), np.float64(1.0), np.float64(-1.8433700033515588), np.float64(0.9388292381689443)],
        [np.float64(1.0), np.float64(-1.989851748094595), np.float64(0.9999999999999998), np.float64(1.0), np.float64(-1.900049176699258), np.float64(0.9537065528461226)],
    ]),
]
