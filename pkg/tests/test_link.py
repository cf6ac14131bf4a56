"""
Tests for the BLE link layer: frames, CRC, hopping, connections, advertising.
"""

import csv

import pytest

from ivwsn.errors import ConfigurationError, ConnectionRejected, FrameError, InvariantViolation
from ivwsn.link.advertising import AdvertisingConfig
from ivwsn.link.connection import (
    ConnectionParams,
    Direction,
    Piconet,
    QueuedPayload,
    connection_event,
    update_channel_map,
)
from ivwsn.link.device import Device, GapRole
from ivwsn.link.hopping import (
    FULL_CHANNEL_MAP,
    ChannelAssessor,
    ChannelSelector,
    channel_map_from,
    classify_interference,
    enabled_channels,
    exclude_channels,
)
from ivwsn.link.packet import LinkPacket, PacketKind, airtime_us, crc24, data_packet_length
from ivwsn.link.trace import TRACE_COLUMNS, PacketTrace
from ivwsn.phy.ber import NoncoherentFskBer
from ivwsn.phy.channel import InterferenceSource, RadioLink
from ivwsn.phy.channels import channel_frequency
from ivwsn.sim.engine import US_PER_S

CRC_POLY = 0x00065B


def crc24_bitwise(data: bytes, init: int = 0xFFFFFF) -> int:
    """Reference long division, one bit at a time, MSB first."""
    reg = init
    for byte in data:
        for i in range(7, -1, -1):
            feedback = ((reg >> 23) & 1) ^ ((byte >> i) & 1)
            reg = (reg << 1) & 0xFFFFFF
            if feedback:
                reg ^= CRC_POLY
    return reg


class ScriptedDraws:
    """Stands in for a numpy Generator; hands out fixed uniform draws."""

    def __init__(self, values):
        self._values = iter(values)

    def random(self):
        return next(self._values)


def connect(link_layer, slave="s1", interval_us=10_000, anchor_us=0, **params):
    params.setdefault("hop_increment", 7)
    params.setdefault("first_channel", 0)
    return link_layer.establish("m", slave, ConnectionParams(interval_us=interval_us, **params), anchor_us)


class TestCrc24:
    """Test cases for the 24-bit link-layer CRC."""

    def test_deterministic(self):
        """Same input, same checksum."""
        assert crc24(b"sensor", b"\x02\x06") == crc24(b"sensor", b"\x02\x06")

    def test_matches_bitwise_reference(self):
        """The table CRC equals bitwise long division, the empty message included."""
        for header, payload in [(b"", b""), (b"\x02\x0a", bytes(range(10))), (b"\x01\x00", b"")]:
            expected = crc24_bitwise(header + payload)
            assert crc24(payload, header) == expected.to_bytes(3, "big")

    def test_custom_init(self):
        """The initial register value is configurable."""
        assert crc24(b"x", init=0x555555) == crc24_bitwise(b"x", 0x555555).to_bytes(3, "big")

    def test_single_bit_flip_always_detected(self):
        """Every single-bit flip of a 10-byte message changes the checksum."""
        message = bytes([0x5A, 0x01, 0xFF, 0x00, 0x33, 0x80, 0x7E, 0x10, 0xC3, 0x99])
        reference = crc24(message)
        for bit in range(8 * len(message)):
            flipped = bytearray(message)
            flipped[bit // 8] ^= 0x80 >> (bit % 8)
            assert crc24(bytes(flipped)) != reference
            assert crc24_bitwise(bytes(flipped)) == int.from_bytes(crc24(bytes(flipped)), "big")


class TestLinkPacket:
    """Test cases for frame construction and length bounds."""

    def test_data_lengths(self):
        """Data frames run 10..47 bytes for 0..37 payload bytes."""
        assert LinkPacket.data(0x1234, b"").total_length == 10
        assert LinkPacket.data(0x1234, bytes(37)).total_length == 47
        with pytest.raises(FrameError):
            LinkPacket.data(0x1234, bytes(38))

    def test_twenty_byte_packet_airtime(self):
        """A 10-byte reading travels in a 20-byte frame taking 160 us."""
        packet = LinkPacket.data(0x1234, bytes(10))
        assert packet.total_length == data_packet_length(10) == 20
        assert packet.airtime_us == airtime_us(20) == 160
        assert packet.length_bits == 160

    def test_declared_total_length(self):
        """An 8-byte reading declared as a 20-byte packet is padded to 20 bytes, 160 us on air."""
        packet = LinkPacket.data(0x8E89BED6, bytes(8), packet_bytes=20)
        assert packet.total_length == 20
        assert packet.airtime_us == 160
        assert packet.payload[:8] == bytes(8) and len(packet.payload) == 10
        assert packet.crc_ok()
        assert data_packet_length(8, 20) == 20

    def test_declared_total_too_short(self):
        """A declared length that cannot hold the payload is rejected."""
        with pytest.raises(FrameError, match="cannot carry"):
            LinkPacket.data(0x1234, bytes(12), packet_bytes=20)
        with pytest.raises(FrameError):
            data_packet_length(8, 48)

    def test_advertisement_has_no_crc(self):
        """Advertisements are 8..39 bytes and carry no CRC."""
        short = LinkPacket.advertisement(b"\x01")
        long = LinkPacket.advertisement(bytes(32))
        assert (short.total_length, long.total_length) == (8, 39)
        assert short.crc is None and short.crc_ok()
        with pytest.raises(FrameError):
            LinkPacket.advertisement(b"")

    def test_crc_verifies(self):
        """A freshly built frame passes its CRC check and fails with another init."""
        packet = LinkPacket.data(0xABCDEF01, b"tyre", crc_init=0x123456)
        assert packet.crc_ok(0x123456)
        assert not packet.crc_ok(0x654321)

    def test_header_flags(self):
        """SN, NESN and more-data land in the header."""
        packet = LinkPacket.data(1, b"x", sn=1, nesn=0, more_data=True)
        assert (packet.sn, packet.nesn, packet.more_data) == (1, 0, True)
        assert packet.kind is PacketKind.DATA
        assert len(packet.to_bytes()) == packet.total_length


class TestHopping:
    """Test cases for the hop rule and channel maps."""

    def test_hop_examples(self):
        """(last + increment) mod 37 with every channel enabled."""
        assert ChannelSelector(7, FULL_CHANNEL_MAP, 0).next_channel() == 7
        assert ChannelSelector(7, FULL_CHANNEL_MAP, 35).next_channel() == 5

    @pytest.mark.parametrize("increment", range(5, 17))
    def test_full_map_cycle_is_permutation(self, increment):
        """37 consecutive hops visit every data channel once, for every increment."""
        for start in (0, 13, 36):
            selector = ChannelSelector.starting_at(start, increment)
            sequence = [selector.next_channel() for _ in range(37)]
            assert sorted(sequence) == list(range(37))
            assert sequence[0] == start
            assert [selector.next_channel() for _ in range(37)] == sequence

    def test_excluded_channels_never_used(self):
        """With 0-9 excluded, 10^4 hops only land on the 27 enabled channels, all of them."""
        channel_map = exclude_channels(FULL_CHANNEL_MAP, range(10))
        selector = ChannelSelector(11, channel_map)
        used = [selector.next_channel() for _ in range(10_000)]
        assert set(used) == set(range(10, 37))

    def test_consecutive_channels_differ(self):
        """Consecutive events use different channels, even with two channels left."""
        selector = ChannelSelector(5, channel_map_from([3, 4]))
        used = [selector.next_channel() for _ in range(200)]
        assert all(a != b for a, b in zip(used, used[1:]))

    def test_map_needs_two_channels(self):
        """A map with fewer than two channels is rejected."""
        with pytest.raises(ConfigurationError):
            ChannelSelector(5, channel_map_from([3]))
        with pytest.raises(ConfigurationError):
            ChannelSelector(4)

    def test_map_helpers(self):
        """Masks and channel lists convert both ways."""
        assert enabled_channels(channel_map_from([0, 5, 36])) == [0, 5, 36]
        assert len(enabled_channels(FULL_CHANNEL_MAP)) == 37


class TestClassifyInterference:
    """Test cases for channel classification."""

    def jammed_stats(self, jammed):
        return {ch: (3 if ch in jammed else 0, 3) for ch in range(37)}

    def test_jammer_excluded(self):
        """Channels 10-13 always failing are dropped, nothing else."""
        stats = self.jammed_stats({10, 11, 12, 13})
        suggested = classify_interference(FULL_CHANNEL_MAP, stats, 100, 100, 0.5)
        assert enabled_channels(suggested) == [ch for ch in range(37) if ch not in (10, 11, 12, 13)]

    def test_no_failures_keeps_map(self):
        """A clean window leaves the map unchanged."""
        stats = self.jammed_stats(set())
        assert classify_interference(FULL_CHANNEL_MAP, stats, 100, 100, 0.5) == FULL_CHANNEL_MAP

    def test_threshold_is_exclusive(self):
        """A channel failing exactly at the threshold stays; one just above it goes."""
        stats = self.jammed_stats(set())
        stats[7] = (2, 4)
        stats[8] = (3, 5)
        suggested = classify_interference(FULL_CHANNEL_MAP, stats, 100, 100, 0.5)
        assert 7 in enabled_channels(suggested)
        assert 8 not in enabled_channels(suggested)

    def test_all_failing_keeps_two_best(self):
        """Never fewer than two channels; the least bad ones stay."""
        stats = {ch: (3, 3) for ch in range(37)}
        stats[20] = (2, 3)
        stats[30] = (2, 3)
        suggested = classify_interference(FULL_CHANNEL_MAP, stats, 100, 100, 0.5)
        assert enabled_channels(suggested) == [20, 30]

    def test_deferred_until_window_observed(self):
        """Before the window fills the map is returned unchanged."""
        stats = self.jammed_stats({1, 2})
        assert classify_interference(FULL_CHANNEL_MAP, stats, 99, 100, 0.5) == FULL_CHANNEL_MAP

    def test_assessor_window_slides(self):
        """Only the last ``window`` results are kept."""
        assessor = ChannelAssessor(window=3)
        for channel, ok in [(1, False), (2, True), (1, True), (1, True)]:
            assessor.record(channel, ok)
        assert assessor.failure_stats() == {2: (0, 1), 1: (0, 2)}
        assert assessor.observed == 4


class TestConnectionEvent:
    """Test cases for the master-then-slave exchange and retransmission."""

    def test_lossless_exchange(self, radio):
        """Both payloads are delivered and both queues advance."""
        link_layer, model = radio()
        conn = connect(link_layer)
        conn.master_end.enqueue(QueuedPayload(b"cmd", "m", 0))
        conn.slave_end.enqueue(QueuedPayload(b"reading", "s1", 0))
        outcome = connection_event(conn, 0, model, ScriptedDraws([0.0, 0.0]))
        assert outcome.clean
        assert outcome.delivered[Direction.MASTER_TO_SLAVE].data == b"cmd"
        assert outcome.delivered[Direction.SLAVE_TO_MASTER].data == b"reading"
        assert conn.anchor_us == conn.interval_us
        assert outcome.slave_packet.total_length == 17

    def test_corrupted_slave_packet_is_retransmitted_once(self, radio):
        """A lost slave packet goes out again next event and arrives exactly once."""
        link_layer, model = radio(packet_error_rate=0.5)
        conn = connect(link_layer)
        payload = QueuedPayload(b"reading", "s1", 0)
        conn.slave_end.enqueue(payload)
        draws = ScriptedDraws([0.1, 0.9, 0.1, 0.1, 0.1, 0.1])
        delivered = []
        for k in range(3):
            outcome = connection_event(conn, k * conn.interval_us, model, draws)
            delivered += [p for d, p in outcome.delivered.items() if d is Direction.SLAVE_TO_MASTER]
        assert delivered == [payload]
        assert payload.transmissions == 2
        assert payload.retransmissions == 1
        assert conn.slave_end.backlog == 0

    def test_duplicate_master_packet_is_dropped(self, radio):
        """A repeat of an accepted packet is not delivered twice."""
        link_layer, model = radio(packet_error_rate=0.5)
        conn = connect(link_layer)
        payload = QueuedPayload(b"cmd", "m", 0)
        conn.master_end.enqueue(payload)
        draws = ScriptedDraws([0.1, 0.9, 0.1, 0.1])
        first = connection_event(conn, 0, model, draws)
        second = connection_event(conn, conn.interval_us, model, draws)
        assert Direction.MASTER_TO_SLAVE in first.delivered
        assert Direction.MASTER_TO_SLAVE not in second.delivered
        assert second.acknowledged[Direction.MASTER_TO_SLAVE] is payload

    def test_lost_master_packet_silences_slave(self, radio):
        """The slave only transmits after hearing the master."""
        link_layer, model = radio(packet_error_rate=0.5)
        conn = connect(link_layer)
        outcome = connection_event(conn, 0, model, ScriptedDraws([0.9]))
        assert outcome.slave_packet is None
        assert not outcome.clean
        assert conn.missed_events == 1

    def test_event_off_anchor_is_an_invariant_violation(self, radio):
        """Running an event away from its anchor is a bug."""
        link_layer, model = radio()
        conn = connect(link_layer, anchor_us=500)
        with pytest.raises(InvariantViolation):
            connection_event(conn, 400, model, ScriptedDraws([0.0, 0.0]))

    def test_channel_map_update_applies_next_event(self, radio):
        """A staged map takes effect at the next event, never on 0-9."""
        link_layer, model = radio()
        conn = connect(link_layer, hop_increment=5)
        new_map = exclude_channels(FULL_CHANNEL_MAP, range(10))
        update_channel_map(conn, new_map)
        assert conn.channel_map == FULL_CHANNEL_MAP
        channels = [connection_event(conn, k * conn.interval_us, model, ScriptedDraws([0.0, 0.0])).channel
                    for k in range(500)]
        assert conn.channel_map == new_map
        assert min(channels) >= 10

    def test_bad_channel_map_update_rejected(self, radio):
        """Updates leaving fewer than two channels are refused."""
        link_layer, _ = radio()
        conn = connect(link_layer)
        with pytest.raises(ConfigurationError):
            update_channel_map(conn, channel_map_from([7]))


class TestLinkLayer:
    """Test cases for connections driven by the event queue."""

    def test_two_second_interval_anchors(self, radio):
        """Interval 2 s gives events at anchor, +2 s, +4 s."""
        link_layer, _ = radio()
        times = []
        link_layer.event_listeners.append(lambda conn, outcome: times.append(outcome.time_us))
        connect(link_layer, interval_us=2 * US_PER_S, anchor_us=1_000)
        link_layer.sim.run_until(5 * US_PER_S + 1_000)
        assert times == [1_000, 2 * US_PER_S + 1_000, 4 * US_PER_S + 1_000]

    def test_star_topology_enforced(self, radio):
        """Peripherals cannot act as masters."""
        link_layer, _ = radio(slaves=("s1", "s2"))
        with pytest.raises(ConfigurationError):
            link_layer.establish("s1", "s2", ConnectionParams(interval_us=10_000), 0)

    def test_peripheral_joins_one_piconet(self, radio):
        """A connected peripheral cannot join a second master."""
        link_layer, model = radio()
        link_layer.add_device(Device.with_roles("m2", ["central"]))
        model.add_link(RadioLink("m2", "s1", 40.0))
        connect(link_layer)
        with pytest.raises(ConfigurationError):
            link_layer.establish("m2", "s1", ConnectionParams(interval_us=10_000), 0)

    def test_piconet_capacity(self, radio):
        """The master refuses slaves beyond its capacity."""
        link_layer, _ = radio(slaves=("s1", "s2"))
        link_layer.establish("m", "s1", ConnectionParams(interval_us=10_000), 0, capacity=1)
        with pytest.raises(ConfigurationError):
            link_layer.establish("m", "s2", ConnectionParams(interval_us=10_000), 5_000, capacity=1)

    def test_distinct_access_addresses(self, radio):
        """Each connection of a piconet gets its own access address."""
        link_layer, _ = radio(slaves=("s1", "s2", "s3"))
        conns = [connect(link_layer, s, anchor_us=i * 1_000) for i, s in enumerate(("s1", "s2", "s3"))]
        assert len({c.access_address for c in conns}) == 3
        assert isinstance(link_layer.piconets["m"], Piconet)
        assert link_layer.piconets["m"].slaves == ["s1", "s2", "s3"]

    def test_supervision_timeout_disconnects_and_readvertises(self, radio):
        """No clean exchange for the supervision count drops the link; the peripheral advertises again."""
        link_layer, _ = radio(packet_error_rate=1.0)
        link_layer.advertise("s1", AdvertisingConfig(100_000, jitter_max_us=0))
        reasons = []
        link_layer.disconnected_listeners.append(lambda conn, reason: reasons.append(reason))
        conn = connect(link_layer, supervision_events=6, anchor_us=1_000)
        assert not link_layer.advertisers["s1"].active
        link_layer.sim.run_until(1_000 + 10 * conn.interval_us)
        assert reasons == ["supervision timeout"]
        assert link_layer.event_counts["s1"] == 6
        assert not conn.open
        assert link_layer.advertisers["s1"].active
        assert link_layer.devices["s1"].piconet is None


class TestAdvertising:
    """Test cases for advertising, scanning and connection requests."""

    def setup_observers(self, radio, **channel_kwargs):
        link_layer, model = radio(slaves=(), **channel_kwargs)
        link_layer.add_device(Device.with_roles("tag", ["broadcaster"]))
        scanners = {}
        for channel in (37, 38, 39):
            node = f"obs{channel}"
            link_layer.add_device(Device.with_roles(node, ["observer"]))
            model.add_link(RadioLink("tag", node, 40.0))
            scanners[channel] = link_layer.scan(node, dwell_us=US_PER_S, channels=[channel])
        return link_layer, scanners

    def test_one_copy_per_channel_per_event(self, radio):
        """Three repetitions put one copy on each advertising channel."""
        link_layer, scanners = self.setup_observers(radio)
        advertiser = link_layer.advertise("tag", AdvertisingConfig(100_000, payload=b"hi", jitter_max_us=0))
        link_layer.sim.run_until(450_000)
        assert advertiser.events_sent == 5
        for channel, scanner in scanners.items():
            assert len(scanner.reports) == 5
            assert {r.channel for r in scanner.reports} == {channel}
            assert scanner.reports[0].data == b"hi"

    def test_any_copy_suffices(self, radio):
        """With two of three channels jammed the advertisement still gets through."""
        jammers = [
            InterferenceSource(channel_frequency(37), 2.0, 10.0, path_loss_db=20.0),
            InterferenceSource(channel_frequency(38), 2.0, 10.0, path_loss_db=20.0),
        ]
        link_layer, scanners = self.setup_observers(radio, ber_curve=NoncoherentFskBer(), interferers=jammers)
        link_layer.advertise("tag", AdvertisingConfig(100_000, jitter_max_us=0))
        link_layer.sim.run_until(450_000)
        assert scanners[37].reports == [] and scanners[38].reports == []
        assert len(scanners[39].reports) == 5

    def test_advertiser_unaffected_by_reception(self, radio):
        """Advertising carries on identically with or without listeners."""
        link_layer, _ = radio(slaves=())
        link_layer.add_device(Device.with_roles("tag", ["broadcaster"]))
        advertiser = link_layer.advertise("tag", AdvertisingConfig(50_000, jitter_max_us=0))
        link_layer.sim.run_until(199_999)
        assert advertiser.events_sent == 4 and advertiser.active

    def test_no_advertisers_no_reports(self, radio):
        """An idle scan returns nothing."""
        link_layer, _ = radio(slaves=())
        link_layer.add_device(Device.with_roles("obs", ["observer"]))
        scanner = link_layer.scan("obs")
        link_layer.sim.run_until(US_PER_S)
        assert scanner.reports == []

    def test_out_of_range_advertiser_not_heard(self, radio):
        """RSSI below sensitivity means nothing is demodulated."""
        link_layer, model = radio(slaves=(), sensitivity_dbm=-90.0)
        link_layer.add_device(Device.with_roles("tag", ["broadcaster"]))
        link_layer.add_device(Device.with_roles("obs", ["observer"]))
        model.add_link(RadioLink("tag", "obs", 95.0))
        scanner = link_layer.scan("obs", dwell_us=US_PER_S, channels=[37])
        link_layer.advertise("tag", AdvertisingConfig(100_000, jitter_max_us=0))
        link_layer.sim.run_until(US_PER_S)
        assert scanner.reports == []

    def test_scan_for_lists_advertisements_with_rssi(self, radio):
        """A bounded scan returns each advertisement heard with its RSSI and then stops listening."""
        link_layer, model = radio(slaves=())
        link_layer.add_device(Device.with_roles("tag", ["broadcaster"]))
        link_layer.add_device(Device.with_roles("obs", ["observer"]))
        model.add_link(RadioLink("tag", "obs", 40.0))
        link_layer.advertise("tag", AdvertisingConfig(100_000, payload=b"hi", jitter_max_us=0))
        heard = link_layer.scan_for("obs", 450_000, dwell_us=US_PER_S, channels=[37])
        assert len(heard) == 5
        assert all(r.data == b"hi" and r.advertiser == "tag" for r in heard)
        assert all(r.rssi_dbm == pytest.approx(-40.0) for r in heard)
        assert link_layer.sim.now == 450_000
        assert "obs" not in link_layer.scanners

    def test_scan_for_out_of_range_is_empty(self, radio):
        """An advertiser below sensitivity yields an empty list."""
        link_layer, model = radio(slaves=(), sensitivity_dbm=-90.0)
        link_layer.add_device(Device.with_roles("tag", ["broadcaster"]))
        link_layer.add_device(Device.with_roles("obs", ["observer"]))
        model.add_link(RadioLink("tag", "obs", 95.0))
        link_layer.advertise("tag", AdvertisingConfig(100_000, jitter_max_us=0))
        assert link_layer.scan_for("obs", US_PER_S, dwell_us=US_PER_S, channels=[37]) == []

    def test_scan_for_needs_a_duration(self, radio):
        """A bounded scan must last a positive time."""
        link_layer, _ = radio(slaves=())
        link_layer.add_device(Device.with_roles("obs", ["observer"]))
        with pytest.raises(ConfigurationError):
            link_layer.scan_for("obs", 0)

    def test_roles_checked(self, radio):
        """Only broadcasters or peripherals advertise; only observers or centrals scan."""
        link_layer, _ = radio()
        with pytest.raises(ConfigurationError):
            link_layer.advertise("m", AdvertisingConfig(100_000))
        with pytest.raises(ConfigurationError):
            link_layer.scan("s1")

    def test_correct_pass_code_connects(self, radio):
        """The right pass code establishes the link and stops advertising."""
        link_layer, _ = radio()
        link_layer.devices["s1"].pass_code = b"secret"
        link_layer.advertise("s1", AdvertisingConfig(100_000))
        conn = link_layer.initiate_connection("m", "s1", ConnectionParams(interval_us=100_000), b"secret")
        assert conn is not None and conn.open
        assert not link_layer.advertisers["s1"].active
        assert link_layer.devices["s1"].has_role(GapRole.PERIPHERAL)

    def test_wrong_pass_code_rejected(self, radio):
        """A wrong pass code is refused and the peer keeps advertising."""
        link_layer, _ = radio()
        link_layer.devices["s1"].pass_code = b"secret"
        link_layer.advertise("s1", AdvertisingConfig(100_000))
        with pytest.raises(ConnectionRejected):
            link_layer.initiate_connection("m", "s1", ConnectionParams(interval_us=100_000), b"guess")
        assert link_layer.advertisers["s1"].active
        assert link_layer.connections() == []


class TestAdaptiveHopping:
    """End-to-end adaptive hopping against a jammer on channels 10-13."""

    def test_jammer_excluded_and_delivery_recovers(self, radio):
        """After one 100-event window the map drops 10-13 and every later event is clean."""
        jammer = InterferenceSource(2428.0, 10.0, 20.0, path_loss_db=40.0)
        link_layer, _ = radio(ber_curve=NoncoherentFskBer(), interferers=[jammer])
        outcomes = []
        link_layer.event_listeners.append(lambda conn, outcome: outcomes.append(outcome))
        conn = connect(link_layer, interval_us=10_000, afh_window=100, afh_threshold=0.5, afh_auto=True,
                       supervision_events=50)
        link_layer.sim.run_until(299 * conn.interval_us)
        assert len(outcomes) == 300
        assert {o.channel for o in outcomes[:100] if not o.clean} == {10, 11, 12, 13}
        assert enabled_channels(conn.channel_map) == [ch for ch in range(37) if ch not in (10, 11, 12, 13)]
        assert all(o.clean for o in outcomes[100:])


@pytest.mark.slow
class TestReliableDelivery:
    """Exactly-once in-order delivery under 30% uniform packet corruption."""

    def test_ten_thousand_payloads(self, radio):
        """10^4 slave payloads arrive once each, in order, with retransmissions counted."""
        n = 10_000
        link_layer, _ = radio(packet_error_rate=0.3)
        delivered = []
        link_layer.delivery_listeners.append(
            lambda conn, direction, payload, arrival: delivered.append(payload.sequence)
        )
        conn = connect(link_layer, interval_us=1_000, supervision_events=1_000_000)
        payloads = [QueuedPayload(bytes(10), "s1", 0, sequence=i) for i in range(n)]
        for payload in payloads:
            link_layer.enqueue(conn, "s1", payload)
        sim = link_layer.sim
        while len(delivered) < n and sim.now < 200 * US_PER_S:
            sim.run_until(sim.now + US_PER_S)
        assert delivered == list(range(n))
        assert all(p.transmissions >= 1 for p in payloads)
        assert sum(p.retransmissions for p in payloads) > n // 5


class TestPacketTrace:
    """Test cases for the packet trace CSV."""

    def test_trace_rows(self, radio, tmp_path):
        """Each connection event adds a master and a slave row."""
        link_layer, _ = radio()
        link_layer.trace = PacketTrace(enabled=True)
        connect(link_layer)
        link_layer.sim.run_until(20_000)
        path = link_layer.trace.write_csv(tmp_path / "trace.csv")
        with path.open(newline="") as f:
            rows = list(csv.DictReader(f))
        assert list(rows[0]) == TRACE_COLUMNS
        assert len(rows) == 6
        assert [r["direction"] for r in rows[:2]] == ["m2s", "s2m"]
        assert [(r["sender"], r["receiver"]) for r in rows[:2]] == [("m", "s1"), ("s1", "m")]
        assert rows[0]["crc_ok"] == "1"

    def test_advertising_rows_name_sender_and_listener(self, radio):
        """Advertising rows carry the advertiser as sender and the scanner as receiver."""
        link_layer, model = radio(slaves=())
        link_layer.trace = PacketTrace(enabled=True)
        link_layer.add_device(Device.with_roles("tag", ["broadcaster"]))
        link_layer.add_device(Device.with_roles("obs", ["observer"]))
        model.add_link(RadioLink("tag", "obs", 40.0))
        link_layer.scan("obs", dwell_us=US_PER_S, channels=[37])
        link_layer.advertise("tag", AdvertisingConfig(100_000, jitter_max_us=0))
        link_layer.sim.run_until(50_000)
        (record,) = link_layer.trace.records
        assert (record.sender, record.receiver, record.direction) == ("tag", "obs", "adv")

    def test_disabled_trace_records_nothing(self):
        """A disabled trace drops records."""
        trace = PacketTrace(enabled=False)
        trace.record(0, "m", "s1", "m2s", "data", 1, 10, True, -40.0)
        assert trace.records == []
