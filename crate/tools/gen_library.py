#!/usr/bin/env python3
"""Regenerates crates/core/data/library.json, the shipped tool library.

Run from the repository root:  python3 tools/gen_library.py
"""
import json
import pathlib

LIB_VERSION = "phy-toolkit-1.0.0"


def P(name, kind, required, description, default=None, units=None):
    p = {"name": name, "description": description, "value_kind": kind, "required": required}
    if default is not None:
        p["default"] = typed(kind, default)
    if units is not None:
        p["units"] = units
    return p


def O(name, kind, description):
    return {"name": name, "description": description, "value_kind": kind}


def typed(kind, v):
    if kind == "matrix":
        rows, cols, data = v
        return {"kind": "matrix", "rows": rows, "cols": cols, "data": data}
    return {"kind": kind, "value": v}


APIS = []


def A(id_, name, category, instruction, params=(), outputs=()):
    APIS.append({
        "id": id_,
        "name": name,
        "category": category,
        "instruction": instruction,
        "parameters": list(params),
        "outputs": list(outputs),
    })


CH = P("estimated_channel", "matrix", True, "requires the estimated CSI matrix")
UE = P("ue_index", "scalar", False, "index of the target user equipment", default=0.0)
STATUS = O("status", "enum", "activation status reported by the function")

# ---------------------------------------------------------------- perception
A("estimate_csi", "Estimate CSI", "perception",
  "Estimate the downlink channel state information from received reference signals; "
  "the estimated channel state information matrix will be stored in a temporary variable named CSI_matrix.",
  [P("pilot_pattern", "enum", False, "reference signal pilot pattern used for estimation", default="dmrs_type1")],
  [O("CSI_matrix", "matrix", "the estimated channel state information (CSI) matrix")])
A("estimate_uplink_csi", "Estimate uplink CSI", "perception",
  "Derive the uplink channel response of a handset from its sounding reference symbols.",
  [UE], [O("uplink_channel", "matrix", "uplink channel response derived from sounding symbols")])
A("estimate_noise_variance", "Estimate noise variance", "perception",
  "Quantify thermal noise variance on empty resource elements of the receiver.",
  [], [O("noise_variance", "scalar", "thermal noise variance per resource element")])
A("estimate_doppler_shift", "Estimate Doppler shift", "perception",
  "Infer Doppler frequency shift from phase rotation between consecutive pilot symbols.",
  [], [O("doppler_hz", "scalar", "Doppler frequency shift in hertz")])
A("estimate_delay_spread", "Estimate delay spread", "perception",
  "Compute root mean square delay spread of the multipath power delay profile.",
  [], [O("delay_spread_ns", "scalar", "rms multipath delay spread in nanoseconds")])
A("estimate_angle_of_arrival", "Estimate angle of arrival", "perception",
  "Locate incoming wavefront direction with a MUSIC subspace search over the antenna array.",
  [P("array_size", "scalar", False, "number of antenna elements in the array", default=8.0)],
  [O("aoa_deg", "scalar", "incoming wavefront direction in degrees")])
A("estimate_timing_offset", "Estimate timing offset", "perception",
  "Detect symbol timing misalignment by correlating the primary synchronization sequence.",
  [], [O("timing_offset_us", "scalar", "symbol timing misalignment in microseconds")])
A("estimate_carrier_frequency_offset", "Estimate CFO", "perception",
  "Measure oscillator carrier frequency offset using cyclic prefix autocorrelation.",
  [], [O("cfo_hz", "scalar", "oscillator carrier frequency offset in hertz")])
A("measure_rsrp", "Measure RSRP", "perception",
  "Average reference signal received power across synchronization blocks of the serving cell.",
  [UE], [O("rsrp_dbm", "scalar", "reference signal received power in dBm")])
A("measure_rsrq", "Measure RSRQ", "perception",
  "Calculate reference signal received quality as the RSRP to carrier RSSI ratio.",
  [UE], [O("rsrq_db", "scalar", "reference signal received quality in dB")])
A("measure_sinr", "Measure SINR", "perception",
  "Evaluate signal to interference plus noise ratio on demodulation pilots of the shared channel.",
  [UE], [O("sinr_db", "scalar", "signal to interference plus noise ratio in dB")])
A("measure_interference_level", "Measure interference", "perception",
  "Scan idle physical resource blocks to gauge neighbouring cell interference power.",
  [], [O("interference_dbm", "scalar", "neighbouring cell interference power in dBm")])
A("detect_blockage", "Detect blockage", "perception",
  "Flag sudden millimetre wave link obstruction from abrupt received power drops.",
  [], [O("blocked", "boolean", "whether the millimetre wave link is obstructed")])
A("sense_target_range", "Sense target range", "perception",
  "Extract radar target distance from the echo round trip delay of the sensing waveform.",
  [], [O("target_range_m", "scalar", "radar target distance in metres")])
A("sense_target_velocity", "Sense target velocity", "perception",
  "Resolve radial speed of moving reflectors using a range Doppler map.",
  [], [O("target_velocity_mps", "scalar", "reflector radial speed in metres per second")])
A("sense_target_angle", "Sense target angle", "perception",
  "Determine reflector azimuth bearing via digital beamscanning of sensing echoes.",
  [], [O("target_azimuth_deg", "scalar", "reflector azimuth bearing in degrees")])
A("track_ue_position", "Track UE position", "perception",
  "Follow handset geographic coordinates with a Kalman filter over positioning fixes.",
  [UE], [O("ue_position", "matrix", "handset coordinates as a 1x3 vector")])
A("classify_mobility", "Classify mobility", "perception",
  "Categorise user movement as static, pedestrian, or vehicular from Doppler statistics.",
  [UE], [O("mobility_class", "enum", "movement category of the user")])
A("estimate_path_loss", "Estimate path loss", "perception",
  "Compare transmit and received power to obtain large scale propagation attenuation.",
  [UE], [O("path_loss_db", "scalar", "large scale propagation attenuation in dB")])
A("estimate_rank_indicator", "Estimate rank", "perception",
  "Select the supportable spatial multiplexing rank from channel singular values.",
  [CH], [O("rank_indicator", "scalar", "supportable spatial multiplexing rank")])
A("compute_pmi", "Compute PMI", "perception",
  "Pick the codebook precoding matrix indicator maximising mutual information.",
  [CH], [O("pmi", "scalar", "codebook precoding matrix indicator")])
A("estimate_cqi", "Estimate CQI", "perception",
  "Map effective SINR to a four bit channel quality indicator for feedback.",
  [UE], [O("cqi", "scalar", "four bit channel quality indicator")])
A("monitor_pa_temperature", "Monitor PA temperature", "perception",
  "Read thermal sensor on the power amplifier die and return its temperature in Celsius.",
  [], [O("pa_temperature_c", "scalar", "power amplifier die temperature in Celsius")])
A("assess_pa_nonlinearity", "Assess PA nonlinearity", "perception",
  "Assess power amplifier nonlinearity distortion caused by rising device temperature and quantify the distortion penalty.",
  [], [O("pa_distortion_db", "scalar", "measured power amplifier distortion penalty in dB")])
A("measure_evm", "Measure EVM", "perception",
  "Compute error vector magnitude of received constellation points against ideal symbols.",
  [], [O("evm_percent", "scalar", "error vector magnitude in percent")])
A("measure_papr", "Measure PAPR", "perception",
  "Record peak to average power ratio statistics of generated OFDM waveforms.",
  [], [O("papr_db", "scalar", "peak to average power ratio in dB")])
A("detect_radar_interference", "Detect radar interference", "perception",
  "Identify co-channel pulsed radar emissions overlapping the licensed carrier.",
  [], [O("radar_detected", "boolean", "whether pulsed radar emissions were found")])
A("map_scattering_environment", "Map scatterers", "perception",
  "Build a spatial map of dominant scatterers and reflecting surfaces around the cell site.",
  [], [O("scatterer_map", "matrix", "spatial map of dominant scatterers")])
A("estimate_channel_covariance", "Estimate covariance", "perception",
  "Accumulate long term spatial covariance of the channel across many slots.",
  [CH], [O("channel_covariance", "matrix", "long term spatial covariance matrix")])
A("predict_channel_aging", "Predict channel aging", "perception",
  "Forecast how stale feedback decorrelates over time given handset velocity.",
  [], [O("aging_factor", "scalar", "feedback decorrelation factor between 0 and 1")])
A("measure_buffer_status", "Measure buffer", "perception",
  "Query pending uplink bytes from buffer status reports of connected handsets.",
  [UE], [O("buffer_bytes", "scalar", "pending uplink bytes")])
A("estimate_ue_speed", "Estimate UE speed", "perception",
  "Approximate handset travelling speed in metres per second from successive location fixes of the handset.",
  [UE], [O("ue_speed_kmh", "scalar", "handset travelling speed in km/h")])
A("detect_line_of_sight", "Detect LOS", "perception",
  "Decide whether a direct line of sight path exists using Rician K factor analysis.",
  [], [O("los_present", "boolean", "whether a direct path exists")])
A("capture_camera_frame", "Capture camera frame", "perception",
  "Grab an image frame from the site camera to assist vision aided beam management.",
  [], [O("camera_frame", "matrix", "captured image frame as intensity matrix")])
A("fuse_sensing_camera", "Fuse sensing and vision", "perception",
  "Combine radar detections with camera objects into a fused obstacle list.",
  [], [O("fused_objects", "matrix", "fused obstacle list")])
A("estimate_beam_quality", "Estimate beam quality", "perception",
  "Rank synchronization beams by layer one reference power reported by handsets.",
  [], [O("beam_ranking", "matrix", "beam identifiers ordered by reference power")])
A("measure_phase_noise", "Measure phase noise", "perception",
  "Characterise local oscillator phase noise through common phase error tracking pilots.",
  [], [O("phase_noise_dbc", "scalar", "local oscillator phase noise in dBc/Hz")])
A("measure_adc_saturation", "Measure ADC clipping", "perception",
  "Count analog to digital converter clipping events at the receive front end.",
  [], [O("clipping_ratio", "scalar", "fraction of clipped converter samples")])
A("estimate_coherence_time", "Estimate coherence time", "perception",
  "Derive temporal coherence duration from the measured Doppler spread.",
  [], [O("coherence_time_ms", "scalar", "temporal coherence duration in milliseconds")])
A("estimate_coherence_bandwidth", "Estimate coherence bandwidth", "perception",
  "Derive frequency coherence width from the inverse of the delay spread.",
  [], [O("coherence_bandwidth_khz", "scalar", "frequency coherence width in kHz")])

# ------------------------------------------------------------- configuration
A("set_tx_power", "Set base station power", "configuration",
  "Adjust the base station downlink transmit power level in dBm.",
  [P("power_dbm", "scalar", True, "desired downlink transmit power", units="dBm")],
  [STATUS])
A("set_ue_tx_power", "Set handset power", "configuration",
  "Command a handset to change its maximum uplink emission power.",
  [UE, P("ue_power_dbm", "scalar", False, "maximum uplink emission power", default=23.0, units="dBm")],
  [STATUS])
A("set_mcs_table", "Set MCS table", "configuration",
  "Switch the modulation and coding scheme table between 64QAM, 256QAM, and low spectral efficiency variants.",
  [P("mcs_table", "enum", False, "name of the modulation coding table", default="qam256")],
  [STATUS])
A("select_mcs", "Select MCS", "configuration",
  "Choose the modulation and coding index for the next grant given channel quality feedback.",
  [P("cqi", "scalar", True, "channel quality indicator reported by the handset")],
  [O("mcs_index", "scalar", "chosen modulation and coding index")])
A("set_numerology", "Set numerology", "configuration",
  "Configure subcarrier spacing numerology mu for the active carrier.",
  [P("mu", "scalar", False, "numerology index mu", default=1.0)], [STATUS])
A("set_bandwidth_part", "Set bandwidth part", "configuration",
  "Activate a narrower bandwidth part to save handset energy.",
  [P("bwp_id", "scalar", False, "bandwidth part identifier", default=0.0)], [STATUS])
A("set_carrier_bandwidth", "Set carrier bandwidth", "configuration",
  "Resize the occupied channel bandwidth of the cell carrier in megahertz.",
  [P("bandwidth_mhz", "scalar", False, "occupied carrier width", default=100.0, units="MHz")], [STATUS])
A("configure_tdd_pattern", "Configure TDD pattern", "configuration",
  "Define the time division duplex slot format ratio of downlink to uplink.",
  [P("tdd_pattern", "text", False, "slot format string", default="DDDSU")], [STATUS])
A("configure_srs", "Configure SRS", "configuration",
  "Schedule periodic sounding reference symbol resources for uplink channel probing.",
  [P("srs_period_slots", "scalar", False, "sounding period in slots", default=10.0)], [STATUS])
A("configure_csi_rs", "Configure CSI-RS", "configuration",
  "Allocate channel state information reference signal ports and periodicity.",
  [P("csi_rs_ports", "scalar", False, "number of reference ports", default=8.0)], [STATUS])
A("configure_dmrs", "Configure DMRS", "configuration",
  "Set demodulation reference signal type and additional positions for high mobility.",
  [P("dmrs_additional_positions", "scalar", False, "extra pilot positions", default=1.0)], [STATUS])
A("configure_ptrs", "Configure PTRS", "configuration",
  "Enable phase tracking reference signals with a chosen frequency density.",
  [P("ptrs_density", "scalar", False, "frequency density of tracking pilots", default=2.0)], [STATUS])
A("configure_ssb_periodicity", "Configure SSB period", "configuration",
  "Change synchronization signal block burst periodicity for initial access.",
  [P("ssb_period_ms", "scalar", False, "burst periodicity", default=20.0, units="ms")], [STATUS])
A("configure_prach", "Configure PRACH", "configuration",
  "Set random access preamble format and occasion configuration index.",
  [P("prach_config_index", "scalar", False, "occasion configuration index", default=16.0)], [STATUS])
A("set_harq_processes", "Set HARQ processes", "configuration",
  "Limit the number of parallel hybrid repeat request processes per handset.",
  [P("harq_processes", "scalar", False, "number of parallel processes", default=16.0)], [STATUS])
A("set_harq_retransmissions", "Set HARQ retransmissions", "configuration",
  "Cap the maximum hybrid repeat request retransmission attempts.",
  [P("max_retx", "scalar", False, "maximum retransmission attempts", default=4.0)], [STATUS])
A("configure_carrier_aggregation", "Configure CA", "configuration",
  "Group component carriers for aggregation with cross carrier scheduling.",
  [P("component_carriers", "scalar", False, "number of aggregated carriers", default=2.0)], [STATUS])
A("activate_secondary_cell", "Activate SCell", "configuration",
  "Bring up an additional secondary serving cell for a handset.",
  [UE], [STATUS])
A("deactivate_secondary_cell", "Deactivate SCell", "configuration",
  "Release an idle secondary serving cell to reduce handset consumption.",
  [UE], [STATUS])
A("set_mimo_layers", "Set MIMO layers", "configuration",
  "Restrict the maximum number of spatial multiplexing streams.",
  [P("layers", "scalar", False, "maximum spatial streams", default=4.0)], [STATUS])
A("configure_codebook", "Configure codebook", "configuration",
  "Select type one or type two codebook subset restriction for precoder feedback.",
  [P("codebook_type", "enum", False, "codebook family", default="type1")], [STATUS])
A("set_precoder_zf", "Zero forcing precoder", "configuration",
  "Compute a zero forcing multiuser precoder from the estimated channel.",
  [CH], [O("precoder", "matrix", "multiuser precoding weights")])
A("set_precoder_mmse", "Regularised precoder", "configuration",
  "Compute a regularised minimum mean square error precoder weighting noise variance.",
  [CH, P("noise_variance", "scalar", False, "receiver noise variance", default=0.01)],
  [O("precoder", "matrix", "multiuser precoding weights")])
A("configure_beam_sweep", "Configure beam sweep", "configuration",
  "Set the number of synchronization beams swept per burst and their angular spacing.",
  [P("beam_count", "scalar", False, "beams per burst", default=8.0)], [STATUS])
A("select_beam", "Select beam", "configuration",
  "Lock the serving analog beam to the best ranked beam identifier.",
  [P("beam_ranking", "matrix", True, "beam identifiers ordered by reference power")],
  [O("beam_id", "scalar", "locked serving beam identifier")])
A("configure_beam_failure_recovery", "Configure BFR", "configuration",
  "Arm beam failure detection thresholds and candidate recovery beams.",
  [P("bfr_threshold_db", "scalar", False, "failure detection threshold", default=-6.0)], [STATUS])
A("set_cyclic_prefix", "Set cyclic prefix", "configuration",
  "Toggle between normal and extended cyclic prefix length for long delay spread.",
  [P("cp_type", "enum", False, "prefix length type", default="normal")], [STATUS])
A("configure_drx", "Configure DRX", "configuration",
  "Program discontinuous reception cycles so handsets sleep between bursts.",
  [P("drx_cycle_ms", "scalar", False, "sleep cycle length", default=40.0)], [STATUS])
A("set_timing_advance", "Set timing advance", "configuration",
  "Send a timing advance command aligning uplink arrival at the gNB.",
  [UE, P("timing_offset_us", "scalar", True, "symbol timing misalignment in microseconds")], [STATUS])
A("configure_power_headroom_report", "Configure PHR", "configuration",
  "Enable periodic power headroom reporting triggers for uplink budgeting.",
  [P("phr_period_ms", "scalar", False, "report period", default=50.0)], [STATUS])
A("set_pa_backoff", "Set PA backoff", "configuration",
  "Increase power amplifier input backoff to keep operation within the linear region.",
  [P("backoff_db", "scalar", False, "input backoff", default=3.0, units="dB")], [STATUS])
A("enable_dpd", "Enable DPD", "configuration",
  "Switch on classic digital predistortion lookup tables for the transmitter chain.",
  [], [STATUS])
A("disable_dpd", "Disable DPD", "configuration",
  "Switch off digital predistortion lookup tables to save processing.",
  [], [STATUS])
A("set_dpd_coefficients", "Load DPD coefficients", "configuration",
  "Upload memory polynomial predistortion coefficients fitted offline.",
  [P("dpd_coefficients", "matrix", True, "memory polynomial coefficient matrix")], [STATUS])
A("configure_sensing_waveform", "Configure sensing waveform", "configuration",
  "Choose chirp or OFDM radar waveform parameters for integrated sensing.",
  [P("waveform", "enum", False, "radar waveform family", default="ofdm")], [STATUS])
A("set_sensing_duty_cycle", "Set sensing duty cycle", "configuration",
  "Trade communication airtime against sensing airtime by setting the radar duty cycle.",
  [P("duty_cycle", "scalar", False, "fraction of airtime used for sensing", default=0.1)], [STATUS])
A("allocate_sensing_resources", "Allocate sensing resources", "configuration",
  "Reserve time frequency resource blocks dedicated to sensing pulses.",
  [P("sensing_prbs", "scalar", False, "reserved resource blocks", default=12.0)], [STATUS])
A("configure_ofdm_fft_size", "Configure FFT size", "configuration",
  "Set the inverse FFT size used by the OFDM baseband.",
  [P("fft_size", "scalar", False, "transform length", default=4096.0)], [STATUS])
A("set_guard_band", "Set guard band", "configuration",
  "Widen spectral guard bands to protect adjacent channel leakage limits.",
  [P("guard_khz", "scalar", False, "guard band width", default=500.0, units="kHz")], [STATUS])
A("configure_uplink_power_control", "Configure UL power control", "configuration",
  "Tune fractional path loss compensation alpha and nominal P0 for uplink.",
  [P("p0_dbm", "scalar", False, "nominal receive target", default=-90.0),
   P("alpha", "scalar", False, "fractional compensation factor", default=0.8)], [STATUS])
A("set_target_bler", "Set target BLER", "configuration",
  "Define the outer loop link adaptation block error rate goal.",
  [P("target_bler", "scalar", False, "block error rate goal", default=0.1)], [STATUS])
A("configure_link_adaptation", "Configure link adaptation", "configuration",
  "Tune outer loop offset step sizes for acknowledgement driven rate control.",
  [P("olla_step_db", "scalar", False, "offset step size", default=0.5)], [STATUS])
A("set_scheduler_policy", "Set scheduler policy", "configuration",
  "Pick proportional fair, round robin, or max throughput scheduling discipline.",
  [P("policy", "enum", False, "scheduling discipline", default="proportional_fair")], [STATUS])
A("set_qos_flow_priority", "Set QoS flow priority", "configuration",
  "Raise or lower the 5QI priority level of a traffic flow.",
  [P("priority", "scalar", False, "priority level", default=5.0)], [STATUS])
A("configure_urllc_minislot", "Configure mini-slot", "configuration",
  "Enable two symbol mini-slot scheduling for ultra reliable low latency traffic.",
  [P("minislot_symbols", "scalar", False, "symbols per mini-slot", default=2.0)], [STATUS])
A("configure_ldpc_base_graph", "Configure LDPC graph", "configuration",
  "Pick LDPC base graph one or two according to transport block size and code rate.",
  [P("base_graph", "enum", False, "base graph choice", default="bg1")], [STATUS])
A("set_rate_matching", "Set rate matching", "configuration",
  "Configure circular buffer redundancy version for rate matching.",
  [P("redundancy_version", "scalar", False, "redundancy version index", default=0.0)], [STATUS])
A("configure_interference_cancellation", "Configure interference cancellation", "configuration",
  "Arm successive interference cancellation with a chosen number of cancellation stages.",
  [P("sic_stages", "scalar", False, "cancellation stages", default=2.0)], [STATUS])
A("set_antenna_tilt", "Set antenna tilt", "configuration",
  "Change remote electrical downtilt of the sector antenna panel.",
  [P("tilt_deg", "scalar", False, "electrical downtilt", default=6.0)], [STATUS])
A("configure_ris_phase", "Configure RIS phases", "configuration",
  "Program reconfigurable intelligent surface element phase shifts toward a handset.",
  [P("ris_phases", "matrix", False, "element phase shifts", default=(1, 2, [0.0, 0.0]))], [STATUS])

# -------------------------------------------------------------- transmission
A("schedule_downlink", "Schedule downlink", "transmission",
  "Allocate downlink resource blocks to handsets for the upcoming slot.",
  [UE], [O("dl_grant", "matrix", "downlink allocation of resource blocks")])
A("schedule_uplink", "Schedule uplink", "transmission",
  "Issue uplink grants assigning PUSCH resources based on buffer reports.",
  [P("buffer_bytes", "scalar", False, "pending uplink bytes", default=0.0)],
  [O("ul_grant", "matrix", "uplink grant allocation")])
A("transmit_pdsch", "Transmit PDSCH", "transmission",
  "Send the physical downlink shared channel payload over the scheduled grant.",
  [P("dl_grant", "matrix", True, "downlink allocation of resource blocks")], [STATUS])
A("receive_pusch", "Receive PUSCH", "transmission",
  "Demodulate and decode the physical uplink shared channel from a handset.",
  [P("ul_grant", "matrix", True, "uplink grant allocation")],
  [O("pusch_bits", "matrix", "decoded uplink payload bits")])
A("transmit_pdcch", "Transmit PDCCH", "transmission",
  "Emit downlink control information on the control resource set.",
  [P("aggregation_level", "scalar", False, "control channel element aggregation", default=4.0)], [STATUS])
A("transmit_ssb", "Transmit SSB", "transmission",
  "Broadcast the synchronization signal block with PSS, SSS and PBCH.",
  [], [STATUS])
A("transmit_csi_rs", "Transmit CSI-RS", "transmission",
  "Radiate configured channel state reference symbols for handset measurement.",
  [], [STATUS])
A("receive_srs", "Receive SRS", "transmission",
  "Capture uplink sounding reference symbol transmissions from handsets for uplink channel sounding.",
  [UE], [O("srs_samples", "matrix", "captured sounding samples")])
A("receive_prach", "Receive PRACH", "transmission",
  "Detect random access preambles and estimate their arrival delay.",
  [], [O("preamble_ids", "matrix", "detected preamble identifiers")])
A("ldpc_encode", "LDPC encode", "transmission",
  "Encode a transport block with low density parity check forward error correction.",
  [P("info_bits", "matrix", False, "information bits", default=(1, 4, [1.0, 0.0, 1.0, 1.0]))],
  [O("codeword", "matrix", "LDPC codeword bits")])
A("ldpc_decode", "LDPC decode", "transmission",
  "Run layered belief propagation to decode LDPC codewords from soft bits.",
  [P("llr", "matrix", True, "soft log likelihood ratios")],
  [O("decoded_bits", "matrix", "hard decided information bits")])
A("polar_encode", "Polar encode", "transmission",
  "Encode control payloads with polar codes and CRC aided frozen bit selection.",
  [], [O("polar_codeword", "matrix", "polar coded control bits")])
A("polar_decode", "Polar decode", "transmission",
  "Apply successive cancellation list decoding to polar coded control bits.",
  [P("llr", "matrix", True, "soft log likelihood ratios")],
  [O("control_bits", "matrix", "decoded control payload")])
A("ofdm_modulate", "OFDM modulate", "transmission",
  "Map frequency domain symbols onto subcarriers and apply the inverse FFT.",
  [], [O("time_samples", "matrix", "baseband time domain samples")])
A("ofdm_demodulate", "OFDM demodulate", "transmission",
  "Strip the cyclic prefix and apply the forward FFT to received samples.",
  [], [O("freq_symbols", "matrix", "frequency domain received symbols")])
A("qam_modulate", "QAM modulate", "transmission",
  "Map coded bits to quadrature amplitude constellation symbols.",
  [P("modulation_order", "scalar", False, "bits per symbol", default=6.0)],
  [O("qam_symbols", "matrix", "constellation symbols")])
A("qam_demodulate", "QAM demodulate", "transmission",
  "Compute per bit soft log likelihood ratios from equalised constellation symbols.",
  [], [O("llr", "matrix", "soft log likelihood ratios")])
A("apply_precoding", "Apply precoding", "transmission",
  "Multiply transmit layers with the precoding weights before antenna mapping.",
  [P("precoder", "matrix", True, "multiuser precoding weights")], [STATUS])
A("mimo_detect_mmse", "MMSE detection", "transmission",
  "Separate spatially multiplexed streams using linear minimum mean square error detection.",
  [CH], [O("detected_symbols", "matrix", "separated stream symbols")])
A("mimo_detect_sphere", "Sphere decoding", "transmission",
  "Perform near maximum likelihood sphere decoding of the MIMO streams.",
  [CH], [O("detected_symbols", "matrix", "separated stream symbols")])
A("equalize_zero_forcing", "ZF equalizer", "transmission",
  "Invert the frequency selective response per subcarrier with a zero forcing equaliser.",
  [CH], [O("equalized_symbols", "matrix", "equalised subcarrier symbols")])
A("perform_harq_combining", "HARQ combining", "transmission",
  "Soft combine retransmitted copies with chase or incremental redundancy combining.",
  [], [O("combined_llr", "matrix", "combined soft values")])
A("apply_scrambling", "Apply scrambling", "transmission",
  "XOR codeword bits with the Gold sequence scrambler seeded by the cell identity.",
  [], [O("scrambled_bits", "matrix", "scrambled codeword bits")])
A("apply_layer_mapping", "Layer mapping", "transmission",
  "Distribute modulation symbols across transmission layers.",
  [P("layers", "scalar", False, "number of layers", default=2.0)],
  [O("layered_symbols", "matrix", "symbols arranged per layer")])
A("perform_rate_matching", "Rate matching", "transmission",
  "Puncture or repeat encoded bits to fit the allocated resource elements.",
  [], [O("rate_matched_bits", "matrix", "bits fitted to the allocation")])
A("insert_cyclic_prefix", "Insert cyclic prefix", "transmission",
  "Prepend each OFDM symbol with a copy of its tail as guard interval.",
  [], [STATUS])
A("apply_digital_predistortion", "Apply predistortion", "transmission",
  "Pre-distort baseband samples through the inverse amplifier model before upconversion.",
  [], [STATUS])
A("perform_beamformed_transmission", "Beamformed transmission", "transmission",
  "Radiate data through the phased array steered toward the locked beam.",
  [P("beam_id", "scalar", False, "locked serving beam identifier", default=0.0)], [STATUS])
A("transmit_sensing_pulse", "Transmit sensing pulse", "transmission",
  "Emit a radar probing burst within the reserved sensing resources.",
  [], [STATUS])
A("receive_sensing_echo", "Receive sensing echo", "transmission",
  "Collect reflected radar returns for range Doppler processing.",
  [], [O("echo_samples", "matrix", "received radar return samples")])
A("perform_joint_comm_sensing_frame", "JCAS frame", "transmission",
  "Run one joint communication and sensing frame sharing a single waveform.",
  [], [STATUS])
A("perform_handover", "Perform handover", "transmission",
  "Move a connected handset to a stronger neighbouring cell.",
  [UE, P("target_cell", "scalar", False, "neighbour cell identifier", default=1.0)], [STATUS])
A("perform_random_access", "Random access", "transmission",
  "Complete the four step contention based random access exchange.",
  [], [STATUS])
A("perform_power_ramping", "Power ramping", "transmission",
  "Step up preamble transmit power after failed access attempts.",
  [P("ramp_step_db", "scalar", False, "ramping increment", default=2.0)], [STATUS])
A("apply_interference_cancellation", "Cancel interference", "transmission",
  "Subtract reconstructed interfering signals from received samples.",
  [], [O("cleaned_samples", "matrix", "samples after interference removal")])
A("perform_channel_interleaving", "Interleave", "transmission",
  "Permute coded bits with a block interleaver against burst errors.",
  [], [O("interleaved_bits", "matrix", "permuted bits")])
A("crc_attach", "Attach CRC", "transmission",
  "Append a 24 bit cyclic redundancy checksum to the transport block.",
  [], [O("tb_with_crc", "matrix", "transport block with checksum")])
A("crc_check", "Check CRC", "transmission",
  "Verify the cyclic redundancy checksum of a decoded transport block.",
  [], [O("crc_ok", "boolean", "whether the checksum matched")])
A("perform_ris_reflection", "RIS reflection", "transmission",
  "Steer reflected energy off the intelligent surface using programmed phases.",
  [], [STATUS])
A("perform_carrier_aggregation_transmission", "CA transmission", "transmission",
  "Split a payload over aggregated component carriers simultaneously.",
  [], [STATUS])

# ------------------------------------------------------------- ai_function
A("enable_deeprx", "Enable DeepRx", "ai_function",
  "Enable the DeepRx neural receiver to compensate power amplifier nonlinearity using the estimated channel.",
  [CH], [O("status", "enum", "activation status of the neural receiver")])
A("disable_deeprx", "Disable DeepRx", "ai_function",
  "Turn off the DeepRx learned receiver and fall back to conventional demodulation.",
  [], [STATUS])
A("enable_deeptx", "Enable DeepTx", "ai_function",
  "Activate the DeepTx learned transmitter waveform shaping that mitigates amplifier distortion.",
  [], [O("status", "enum", "activation status of the neural transmitter")])
A("disable_deeptx", "Disable DeepTx", "ai_function",
  "Turn off the DeepTx learned transmitter and revert to the standard waveform.",
  [], [STATUS])
A("run_neural_channel_estimator", "Neural channel estimator", "ai_function",
  "Refine noisy pilot estimates with a convolutional denoising network.",
  [], [O("refined_channel", "matrix", "network refined channel response")])
A("run_neural_csi_compression", "Compress CSI", "ai_function",
  "Encode channel feedback into a compact latent codeword with an autoencoder.",
  [CH], [O("csi_codeword", "matrix", "latent feedback codeword")])
A("decompress_csi_feedback", "Decompress CSI", "ai_function",
  "Reconstruct full channel feedback from the latent autoencoder codeword.",
  [P("csi_codeword", "matrix", True, "latent feedback codeword")],
  [O("reconstructed_csi", "matrix", "reconstructed channel feedback")])
A("run_neural_beam_prediction", "Beam prediction", "ai_function",
  "Forecast the next best beam from past beam measurements with a recurrent network.",
  [], [O("predicted_beam", "scalar", "forecast beam identifier")])
A("run_neural_mcs_selection", "Learned MCS selection", "ai_function",
  "Infer modulation coding choice with a learned policy from acknowledgement history.",
  [], [O("mcs_index", "scalar", "chosen modulation and coding index")])
A("run_neural_equalizer", "Neural equalizer", "ai_function",
  "Equalise received symbols with a deep unfolded network robust to impairments.",
  [], [O("equalized_symbols", "matrix", "equalised subcarrier symbols")])
A("run_neural_decoder", "Neural decoder", "ai_function",
  "Decode short block codes with a graph neural network decoder.",
  [], [O("decoded_bits", "matrix", "hard decided information bits")])
A("train_channel_model_online", "Online training", "ai_function",
  "Fine tune the deployed channel model with freshly collected field samples.",
  [P("epochs", "scalar", False, "training passes", default=1.0)],
  [O("training_loss", "scalar", "final training loss")])
A("update_model_weights", "Update weights", "ai_function",
  "Swap in a downloaded adapter weight file for the deployed network.",
  [P("weights_uri", "text", False, "location of the weight file", default="local://latest")], [STATUS])
A("load_model_checkpoint", "Load checkpoint", "ai_function",
  "Restore a stored network checkpoint into accelerator memory.",
  [P("checkpoint", "text", False, "checkpoint name", default="baseline")], [STATUS])
A("run_anomaly_detection", "Anomaly detection", "ai_function",
  "Spot abnormal key performance indicator patterns with an isolation forest.",
  [], [O("anomaly_score", "scalar", "abnormality score between 0 and 1")])
A("predict_traffic_load", "Predict traffic", "ai_function",
  "Forecast cell traffic volume for the next hour with a temporal convolution model.",
  [], [O("traffic_forecast", "matrix", "hourly traffic volume forecast")])
A("predict_ue_trajectory", "Predict trajectory", "ai_function",
  "Anticipate the future handset route and position from the recent position history of the handset.",
  [UE], [O("trajectory", "matrix", "predicted waypoints")])
A("run_sensing_target_classifier", "Classify targets", "ai_function",
  "Label radar detections as pedestrian, car, or drone using micro Doppler features.",
  [], [O("target_labels", "matrix", "class label per detection")])
A("run_gesture_recognition", "Gesture recognition", "ai_function",
  "Recognise hand gestures from WiFi style channel fluctuations.",
  [], [O("gesture", "enum", "recognised gesture")])
A("run_neural_dpd", "Neural DPD", "ai_function",
  "Linearise the amplifier with a neural predistorter trained on feedback receiver captures.",
  [], [STATUS])
A("predict_pa_temperature", "Predict PA heating", "ai_function",
  "Project amplifier heating over the next minutes from load and ambient trends.",
  [], [O("predicted_temperature_c", "scalar", "projected amplifier temperature")])
A("run_interference_classifier", "Classify interference", "ai_function",
  "Identify interference source type such as intermodulation or jamming from spectrograms.",
  [], [O("interference_type", "enum", "identified interference source")])
A("run_digital_twin_simulation", "Digital twin simulation", "ai_function",
  "Simulate the cell in its digital twin to preview a configuration change.",
  [], [O("twin_kpis", "matrix", "predicted key indicators")])
A("calibrate_digital_twin", "Calibrate digital twin", "ai_function",
  "Align the digital twin ray tracing materials with measured field data.",
  [], [STATUS])
A("run_semantic_encoder", "Semantic encoder", "ai_function",
  "Extract task relevant semantic features from source content before transmission.",
  [], [O("semantic_features", "matrix", "task relevant features")])
A("run_semantic_decoder", "Semantic decoder", "ai_function",
  "Recover task output directly from received semantic features.",
  [P("semantic_features", "matrix", True, "task relevant features")],
  [O("task_output", "text", "recovered task output")])
A("run_federated_aggregation", "Federated aggregation", "ai_function",
  "Average handset model updates in a federated learning round.",
  [], [O("global_model_version", "scalar", "aggregated model version")])
A("compress_model", "Prune model", "ai_function",
  "Prune network weights to fit baseband accelerator memory budgets.",
  [P("sparsity", "scalar", False, "fraction of pruned weights", default=0.5)], [STATUS])
A("quantize_model", "Quantize model", "ai_function",
  "Convert network weights to eight bit integers for faster inference.",
  [], [STATUS])
A("explain_model_decision", "Explain decision", "ai_function",
  "Produce saliency attributions explaining why the network chose an action.",
  [], [O("explanation", "text", "saliency based explanation")])
A("run_reinforcement_scheduler", "RL scheduler", "ai_function",
  "Allocate resources with a reinforcement learning agent rewarded by quality of service.",
  [], [O("dl_grant", "matrix", "downlink allocation of resource blocks")])
A("run_neural_positioning", "Neural positioning", "ai_function",
  "Fingerprint handset location from channel charts with a regression network.",
  [UE], [O("ue_position", "matrix", "handset coordinates as a 1x3 vector")])
A("run_blockage_prediction", "Predict blockage", "ai_function",
  "Anticipate imminent millimetre wave obstruction from camera and radar cues.",
  [], [O("blockage_probability", "scalar", "probability of imminent obstruction")])
A("run_neural_papr_reduction", "Neural PAPR reduction", "ai_function",
  "Shape tones with a learned constellation to lower peak power excursions.",
  [], [STATUS])
A("run_channel_charting", "Channel charting", "ai_function",
  "Embed channel samples into a low dimensional chart preserving spatial neighbourhoods.",
  [], [O("channel_chart", "matrix", "low dimensional chart coordinates")])
A("run_neural_noise_suppression", "Noise suppression", "ai_function",
  "Suppress impulsive noise bursts in received samples with a learned filter.",
  [], [O("cleaned_samples", "matrix", "samples after interference removal")])
A("run_beam_alignment_agent", "Beam alignment agent", "ai_function",
  "Align transmit and receive beams jointly through a bandit exploration agent.",
  [], [O("beam_id", "scalar", "locked serving beam identifier")])
A("run_link_failure_predictor", "Predict link failure", "ai_function",
  "Warn of radio link failure seconds ahead from degrading measurement sequences.",
  [], [O("failure_probability", "scalar", "probability of radio link failure")])

# ---------------------------------------------------------------- reporting
A("measure_throughput", "Measure throughput", "reporting",
  "Verify the achieved downlink throughput over the current carrier bandwidth and return it in Mbps.",
  [], [O("throughput_mbps", "scalar", "achieved downlink throughput in Mbps")])
A("report_throughput", "Report throughput", "reporting",
  "Publish per handset throughput averages to the upper layer application.",
  [UE], [O("report_id", "text", "identifier of the published record")])
A("report_bler", "Report BLER", "reporting",
  "Tabulate block error rate per modulation index over the last window.",
  [], [O("bler", "scalar", "observed block error rate")])
A("report_latency", "Report latency", "reporting",
  "Summarise air interface packet delay percentiles.",
  [], [O("latency_ms", "scalar", "95th percentile packet delay")])
A("report_cqi", "Report CQI", "reporting",
  "Log the history of wideband channel quality indications.",
  [], [O("report_id", "text", "identifier of the published record")])
A("report_qos_status", "Report QoS", "reporting",
  "Check whether each flow meets its guaranteed bit rate and delay budget.",
  [], [O("qos_met", "boolean", "whether all flows meet their targets")])
A("report_energy_efficiency", "Report energy efficiency", "reporting",
  "Compute delivered bits per joule of radio unit consumption.",
  [], [O("bits_per_joule", "scalar", "delivered bits per joule")])
A("report_pa_health", "Report PA health", "reporting",
  "Summarise amplifier wear indicators such as thermal cycling counts.",
  [], [O("report_id", "text", "identifier of the published record")])
A("report_sensing_results", "Report sensing", "reporting",
  "Deliver the tracked radar object list to the sensing application.",
  [], [O("report_id", "text", "identifier of the published record")])
A("report_beam_status", "Report beam status", "reporting",
  "List active beam identifiers and their serving handsets.",
  [], [O("report_id", "text", "identifier of the published record")])
A("log_configuration_change", "Log configuration change", "reporting",
  "Append an audit entry describing an altered radio parameter.",
  [P("change_note", "text", False, "description of the change", default="unspecified")],
  [O("report_id", "text", "identifier of the published record")])
A("log_error_event", "Log error event", "reporting",
  "Record a fault with severity and stack context in the error journal.",
  [P("severity", "enum", False, "fault severity", default="warning")],
  [O("report_id", "text", "identifier of the published record")])
A("export_kpi_dashboard", "Export KPIs", "reporting",
  "Push aggregated key performance indicators to the operations dashboard.",
  [], [O("report_id", "text", "identifier of the published record")])
A("report_harq_statistics", "Report HARQ stats", "reporting",
  "Count acknowledgements, negative acknowledgements, and retransmission rounds.",
  [], [O("nack_ratio", "scalar", "negative acknowledgement ratio")])
A("report_spectral_efficiency", "Report spectral efficiency", "reporting",
  "Divide carried bits by occupied hertz to obtain bits per second per hertz.",
  [], [O("spectral_efficiency", "scalar", "bits per second per hertz")])
A("report_interference_map", "Report interference map", "reporting",
  "Render a heat map of uplink interference over resource blocks.",
  [], [O("interference_map", "matrix", "interference heat map")])
A("report_ue_capability", "Report UE capability", "reporting",
  "Enumerate band combinations and features supported by a handset.",
  [UE], [O("capability_summary", "text", "supported features")])
A("report_model_accuracy", "Report model accuracy", "reporting",
  "Track prediction error of deployed networks against ground truth labels.",
  [], [O("model_error", "scalar", "mean prediction error")])
A("report_handover_statistics", "Report handover stats", "reporting",
  "Count successful, failed, and ping pong mobility transitions.",
  [], [O("handover_success_rate", "scalar", "successful transition ratio")])
A("report_link_budget", "Report link budget", "reporting",
  "Itemise gains and losses along the radio path into a margin figure.",
  [], [O("link_margin_db", "scalar", "remaining link margin in dB")])
A("report_resource_utilization", "Report utilisation", "reporting",
  "Measure percentage occupancy of physical resource blocks.",
  [], [O("prb_utilization", "scalar", "fraction of occupied resource blocks")])
A("report_alarm", "Raise alarm", "reporting",
  "Raise an operator alarm when a monitored threshold is crossed.",
  [P("alarm_text", "text", False, "alarm message", default="threshold crossed")],
  [O("report_id", "text", "identifier of the published record")])
A("report_task_completion", "Report task completion", "reporting",
  "Notify the requesting upper layer task that its orchestration finished.",
  [P("notes", "text", False, "free text describing the task", default="")],
  [O("report_id", "text", "identifier of the published record")])
A("report_qot_score", "Report QoT", "reporting",
  "Score quality of task achieved for the served application.",
  [], [O("qot_score", "scalar", "quality of task between 0 and 1")])
A("report_reliability", "Report reliability", "reporting",
  "Estimate packet success probability against the reliability target.",
  [P("reliability", "scalar", False, "reliability target", default=0.999)],
  [O("reliability_achieved", "scalar", "measured packet success probability")])
A("report_jitter", "Report jitter", "reporting",
  "Quantify packet delay variation for time sensitive flows.",
  [], [O("jitter_ms", "scalar", "packet delay variation")])
A("report_positioning_accuracy", "Report positioning accuracy", "reporting",
  "Compare location estimates with surveyed points to give horizontal error.",
  [], [O("position_error_m", "scalar", "horizontal location error")])
A("report_digital_twin_divergence", "Report twin divergence", "reporting",
  "Measure mismatch between twin predictions and live counters.",
  [], [O("twin_divergence", "scalar", "prediction mismatch")])
A("report_compensation_gain", "Report compensation gain", "reporting",
  "Quantify throughput recovered by neural transceiver compensation.",
  [], [O("compensation_gain_db", "scalar", "recovered gain in dB")])
A("report_temperature_trend", "Report temperature trend", "reporting",
  "Chart amplifier thermal history and warming slope.",
  [], [O("temperature_slope", "scalar", "warming slope in Celsius per minute")])
A("summarize_execution", "Summarize execution", "reporting",
  "Condense executed step outcomes into an operator readable digest.",
  [], [O("digest", "text", "operator readable digest")])
A("report_power_consumption", "Report power consumption", "reporting",
  "Read radio unit wattage from the power supply telemetry.",
  [], [O("power_w", "scalar", "radio unit consumption in watts")])


def main():
    ids = [a["id"] for a in APIS]
    assert len(ids) == len(set(ids)), "duplicate ids"
    assert len(APIS) == 200, len(APIS)
    root = pathlib.Path(__file__).resolve().parent.parent
    out = root / "crates" / "core" / "data" / "library.json"
    doc = {"library_version": LIB_VERSION, "descriptors": sorted(APIS, key=lambda a: a["id"])}
    out.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {len(APIS)} descriptors to {out}")


if __name__ == "__main__":
    main()
