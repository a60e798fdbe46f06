import os

import streamlit as st
from dotenv import load_dotenv

from cutquad.dashboard import (
    comparison_counts,
    filter_measurements,
    has_artifacts,
    load_artifacts,
    status_counts,
    svg_data_uri,
)

load_dotenv()


# Function to display an SVG plot
def displaySVG(path):
    st.markdown(f'<img src="{svg_data_uri(path)}" width="100%"/>', unsafe_allow_html=True)


st.set_page_config(
    page_title="cutquad artifacts",
    layout="wide",
    initial_sidebar_state="expanded",
)

with st.sidebar:
    st.markdown("### cutquad artifact browser")
    st.markdown("---")
    output_dir = st.text_input("Artifact directory", value=os.getenv("CUTQUAD_OUTPUT_DIR", "artifacts"))

st.title("Cut-cell quadrature benchmark")

if not has_artifacts(output_dir):
    st.warning(f"No manifest.json in {output_dir}. Run `python -m cutquad run --output {output_dir}` first.")
    st.stop()

artifacts = load_artifacts(output_dir)
frame = artifacts.measurements

col1, col2, col3, col4 = st.columns(4)
counts = status_counts(frame)
col1.metric("ok", counts["ok"])
col2.metric("unsupported", counts["unsupported"])
col3.metric("failed", counts["failed"])
verdicts = comparison_counts(artifacts.comparison)
col4.metric("baseline failures", verdicts["failed"] if artifacts.comparison else "-")

st.header("Measurements")
testcases = st.multiselect("Test cases", sorted(frame["testcase"].unique()))
integrators = st.multiselect("Integrators", sorted(frame["integrator"].unique()))
statuses = st.multiselect("Status", sorted(frame["status"].unique()))
st.dataframe(filter_measurements(frame, testcases, integrators, statuses), use_container_width=True)

if artifacts.plots:
    st.header("Plots")
    for path in artifacts.plots:
        st.markdown(f"**{os.path.basename(path)}**")
        displaySVG(path)

if st.checkbox("Show manifest"):
    st.json(artifacts.manifest)
