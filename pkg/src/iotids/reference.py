"""Published class distribution of the RT-IoT2022 flow dataset."""

TOTAL_ROWS = 123_117
N_ATTRIBUTES = 83

CLASS_COUNTS = {
    "SYN Hping": 94_659,
    "Thing Speak": 8_108,
    "ARP Poisoning": 7_750,
    "MQTT Publish": 4_146,
    "DDOS Slowloris": 534,
    "Brute Force": 37,
    "UDP Scan": 2_590,
    "Tree Scan": 2_010,
    "NMAP OS": 2_000,
    "TCP Scan": 1_002,
    "Wipro Bulb": 253,
    "FIN Scan": 28,
}


def check_distribution(n_rows: int, histogram: dict[str, int]) -> list[str]:
    """Mismatches between an ingested dataset and the published figures.

    Label spellings in the CSV differ from the published names, so the class
    counts are compared as a multiset.
    """
    problems = []
    if n_rows != TOTAL_ROWS:
        problems.append(f"row count {n_rows} != {TOTAL_ROWS}")
    got = sorted(histogram.values(), reverse=True)
    want = sorted(CLASS_COUNTS.values(), reverse=True)
    if got != want:
        problems.append(f"class counts {got} != {want}")
    return problems
